#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "kaczlab/dense.hpp"

namespace kaczlab {

/// MatrixMarket `matrix coordinate|array real|integer|pattern general|symmetric`.
/// Throws Parse on malformed input.
DenseMatrix read_matrix_market(std::istream& in);
/// Throws Io when the file cannot be opened.
DenseMatrix read_matrix_market(const std::filesystem::path& path);

/// Dense `array real general` output with 17 significant digits.
void write_matrix_market(std::ostream& out, const DenseMatrix& a);
void write_matrix_market(const std::filesystem::path& path, const DenseMatrix& a);

/// One value per line; blank lines and lines starting with '%' or '#' are
/// ignored. A MatrixMarket array with one column is accepted as well.
Vector read_vector(std::istream& in);
Vector read_vector(const std::filesystem::path& path);

void write_vector(std::ostream& out, std::span<const double> v);
void write_vector(const std::filesystem::path& path, std::span<const double> v);

/// "%.17g" rendering; shortest text that round-trips a double.
std::string format_real(double v);

}  // namespace kaczlab
