#include "kaczlab/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace kaczlab {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool skippable(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '%' || line[first] == '#';
}

bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (!skippable(line)) return true;
  }
  return false;
}

[[noreturn]] void parse_error(std::size_t lineno, const std::string& what) {
  throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": " + what);
}

double parse_value(const std::string& token, std::size_t lineno) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) parse_error(lineno, "bad number '" + token + "'");
    return v;
  } catch (const std::invalid_argument&) {
    parse_error(lineno, "bad number '" + token + "'");
  } catch (const std::out_of_range&) {
    parse_error(lineno, "number out of range '" + token + "'");
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DenseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty MatrixMarket input");
  ++lineno;
  std::istringstream header(lower(line));
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix") {
    parse_error(lineno, "missing '%%MatrixMarket matrix' banner");
  }
  if (format != "coordinate" && format != "array") parse_error(lineno, "unknown format " + format);
  if (field != "real" && field != "integer" && field != "double" && field != "pattern") {
    parse_error(lineno, "unsupported field " + field);
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    parse_error(lineno, "unsupported symmetry " + symmetry);
  }
  const bool symmetric = symmetry == "symmetric";
  const bool pattern = field == "pattern";
  if (pattern && format == "array") parse_error(lineno, "pattern arrays are not valid");

  if (!next_content_line(in, line, lineno)) parse_error(lineno, "missing size line");
  std::istringstream sizes(line);
  long long m = 0, n = 0, nnz = 0;
  sizes >> m >> n;
  if (format == "coordinate") sizes >> nnz;
  if (!sizes || m <= 0 || n <= 0 || nnz < 0) parse_error(lineno, "bad size line");
  if (symmetric && m != n) parse_error(lineno, "symmetric matrix must be square");

  DenseMatrix a(static_cast<std::size_t>(m), static_cast<std::size_t>(n));
  if (format == "array") {
    // column-major; symmetric arrays list the lower triangle only
    for (long long j = 0; j < n; ++j) {
      for (long long i = symmetric ? j : 0; i < m; ++i) {
        if (!next_content_line(in, line, lineno)) parse_error(lineno, "too few entries");
        std::istringstream tok(line);
        std::string t;
        tok >> t;
        const double v = parse_value(t, lineno);
        a(i, j) = v;
        if (symmetric) a(j, i) = v;
      }
    }
  } else {
    for (long long e = 0; e < nnz; ++e) {
      if (!next_content_line(in, line, lineno)) parse_error(lineno, "too few entries");
      std::istringstream tok(line);
      long long i = 0, j = 0;
      tok >> i >> j;
      if (!tok) parse_error(lineno, "bad coordinate entry");
      if (i < 1 || i > m || j < 1 || j > n) parse_error(lineno, "index out of range");
      double v = 1.0;
      if (!pattern) {
        std::string t;
        tok >> t;
        if (t.empty()) parse_error(lineno, "missing value");
        v = parse_value(t, lineno);
      }
      a(i - 1, j - 1) += v;
      if (symmetric && i != j) a(j - 1, i - 1) += v;
    }
  }
  for (double v : a.data()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "matrix has NaN/Inf");
  }
  if (next_content_line(in, line, lineno)) parse_error(lineno, "trailing data");
  return a;
}

DenseMatrix read_matrix_market(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const DenseMatrix& a) {
  out << "%%MatrixMarket matrix array real general\n";
  out << a.rows() << ' ' << a.cols() << '\n';
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) out << format_real(a(i, j)) << '\n';
}

void write_matrix_market(const std::filesystem::path& path, const DenseMatrix& a) {
  auto out = open_out(path);
  write_matrix_market(out, a);
}

Vector read_vector(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  Vector v;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (first && lower(line).rfind("%%matrixmarket", 0) == 0) {
      std::istringstream whole(line + "\n" + std::string(std::istreambuf_iterator<char>(in), {}));
      const DenseMatrix a = read_matrix_market(whole);
      if (a.cols() != 1) throw Error(ErrorKind::Parse, "vector file must have one column");
      return Vector(a.data().begin(), a.data().end());
    }
    first = false;
    if (skippable(line)) continue;
    std::istringstream tok(line);
    std::string t, extra;
    tok >> t;
    if (tok >> extra) parse_error(lineno, "expected one value per line");
    const double x = parse_value(t, lineno);
    if (!std::isfinite(x)) throw Error(ErrorKind::NonFinite, "vector has NaN/Inf");
    v.push_back(x);
  }
  if (v.empty()) throw Error(ErrorKind::Parse, "vector file has no entries");
  return v;
}

Vector read_vector(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_vector(in);
}

void write_vector(std::ostream& out, std::span<const double> v) {
  for (double x : v) out << format_real(x) << '\n';
}

void write_vector(const std::filesystem::path& path, std::span<const double> v) {
  auto out = open_out(path);
  write_vector(out, v);
}

}  // namespace kaczlab
