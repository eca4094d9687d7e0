#include "kaczlab/problems.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

namespace kaczlab {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::size_t parse_count(std::string_view s, std::string_view whole) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorKind::Parse, "bad count '" + std::string(s) + "' in recipe '" +
                                      std::string(whole) + "'");
  }
  return v;
}

double parse_real(std::string_view s, std::string_view whole) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, "bad number '" + std::string(s) + "' in recipe '" +
                                      std::string(whole) + "'");
  }
}

void validate(const ProblemRecipe& r) {
  if (r.m == 0 || r.n == 0) throw Error(ErrorKind::BadDimensions, "recipe needs m, n >= 1");
  switch (r.kind) {
    case RecipeKind::RankDeficient:
      if (r.rank == 0 || r.rank > std::min(r.m, r.n)) {
        throw Error(ErrorKind::BadDimensions, "rank must lie in [1, min(m, n)]");
      }
      break;
    case RecipeKind::CoherentRows:
      if (!(r.coherence >= 0.0 && r.coherence <= 1.0)) {
        throw Error(ErrorKind::BadDimensions, "coherence must lie in [0, 1]");
      }
      break;
    case RecipeKind::OrthonormalBlocks:
      if (r.block_size == 0 || r.block_size > r.n || r.m % r.block_size != 0) {
        throw Error(ErrorKind::BadDimensions,
                    "block size must divide m and not exceed n");
      }
      break;
    case RecipeKind::GaussianNormalized:
      break;
  }
}

Vector gaussian_vector(Rng& rng, std::size_t n) {
  Vector v(n);
  for (double& x : v) x = standard_normal(rng);
  return v;
}

// Orthonormalize the rows of g in place (modified Gram-Schmidt, two passes).
void orthonormalize_rows(DenseMatrix& g) {
  for (std::size_t i = 0; i < g.rows(); ++i) {
    auto ri = g.row(i);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const auto rj = g.row(j);
        const double c = dot(ri, rj);
        for (std::size_t p = 0; p < ri.size(); ++p) ri[p] -= c * rj[p];
      }
    }
    const double nrm = norm(ri);
    for (double& v : ri) v /= nrm;
  }
}

}  // namespace

ProblemRecipe parse_recipe(std::string_view text, std::uint64_t seed) {
  const auto parts = split(text, ':');
  if (parts.size() < 2) {
    throw Error(ErrorKind::Parse, "recipe '" + std::string(text) + "' is not kind:MxN[:param]");
  }
  ProblemRecipe r;
  r.seed = seed;
  const std::string_view kind = parts[0];
  std::size_t want = 3;
  if (kind == "gaussian") {
    r.kind = RecipeKind::GaussianNormalized;
    want = 2;
  } else if (kind == "rankdef") {
    r.kind = RecipeKind::RankDeficient;
  } else if (kind == "coherent") {
    r.kind = RecipeKind::CoherentRows;
  } else if (kind == "orthoblocks") {
    r.kind = RecipeKind::OrthonormalBlocks;
  } else {
    throw Error(ErrorKind::Parse, "unknown recipe kind '" + std::string(kind) + "'");
  }
  if (parts.size() != want) {
    throw Error(ErrorKind::Parse, "recipe '" + std::string(text) + "' has the wrong arity");
  }
  const auto dims = split(parts[1], 'x');
  if (dims.size() != 2) throw Error(ErrorKind::Parse, "dimensions must read MxN");
  r.m = parse_count(dims[0], text);
  r.n = parse_count(dims[1], text);
  switch (r.kind) {
    case RecipeKind::RankDeficient: r.rank = parse_count(parts[2], text); break;
    case RecipeKind::CoherentRows: r.coherence = parse_real(parts[2], text); break;
    case RecipeKind::OrthonormalBlocks: r.block_size = parse_count(parts[2], text); break;
    case RecipeKind::GaussianNormalized: break;
  }
  validate(r);
  return r;
}

std::string to_string(const ProblemRecipe& r) {
  std::ostringstream os;
  const std::string dims = std::to_string(r.m) + "x" + std::to_string(r.n);
  switch (r.kind) {
    case RecipeKind::GaussianNormalized: os << "gaussian:" << dims; break;
    case RecipeKind::RankDeficient: os << "rankdef:" << dims << ':' << r.rank; break;
    case RecipeKind::CoherentRows: os << "coherent:" << dims << ':' << r.coherence; break;
    case RecipeKind::OrthonormalBlocks: os << "orthoblocks:" << dims << ':' << r.block_size; break;
  }
  return os.str();
}

DenseMatrix random_orthogonal(Rng& rng, std::size_t n) {
  DenseMatrix g(n, n);
  for (double& v : g.data()) v = standard_normal(rng);
  orthonormalize_rows(g);
  return g;
}

LinearSystem generate_problem(const ProblemRecipe& r) {
  validate(r);
  Rng rng = make_rng(r.seed);
  const std::size_t m = r.m;
  const std::size_t n = r.n;
  DenseMatrix a(m, n);

  switch (r.kind) {
    case RecipeKind::GaussianNormalized:
      for (double& v : a.data()) v = standard_normal(rng);
      break;
    case RecipeKind::RankDeficient: {
      const DenseMatrix u = random_orthogonal(rng, m);
      const DenseMatrix v = random_orthogonal(rng, n);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          double s = 0.0;
          for (std::size_t t = 0; t < r.rank; ++t) {
            s += u(t, i) * static_cast<double>(t + 1) * v(t, j);
          }
          a(i, j) = s;
        }
      }
      break;
    }
    case RecipeKind::CoherentRows: {
      Vector common = gaussian_vector(rng, n);
      const double cn = norm(common);
      for (double& v : common) v /= cn;
      for (std::size_t i = 0; i < m; ++i) {
        const Vector g = gaussian_vector(rng, n);
        const double gn = norm(g);
        auto row = a.row(i);
        for (std::size_t j = 0; j < n; ++j) {
          row[j] = (1.0 - r.coherence) * g[j] / gn + r.coherence * common[j];
        }
      }
      break;
    }
    case RecipeKind::OrthonormalBlocks: {
      for (std::size_t start = 0; start < m; start += r.block_size) {
        const DenseMatrix q = random_orthogonal(rng, n);
        for (std::size_t t = 0; t < r.block_size; ++t) {
          std::copy_n(q.row(t).begin(), n, a.row(start + t).begin());
        }
      }
      break;
    }
  }

  const Vector planted = gaussian_vector(rng, n);
  for (std::size_t i = 0; i < m; ++i) {
    auto row = a.row(i);
    const double nrm = norm(row);
    if (nrm < kZeroRowTolerance) throw Error(ErrorKind::ZeroRow, "generated a zero row");
    for (double& v : row) v /= nrm;
  }
  Vector b = matvec(a, planted);
  return LinearSystem(std::move(a), std::move(b), planted, true);
}

}  // namespace kaczlab
