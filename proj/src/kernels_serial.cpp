#include "kaczlab/kernels.hpp"

namespace kaczlab::kernels::serial {

void block_residuals(const DenseMatrix& a, std::span<const double> b,
                     std::span<const std::size_t> block, std::span<const double> x,
                     std::span<double> out) {
  for (std::size_t t = 0; t < block.size(); ++t) {
    out[t] = dot(a.row(block[t]), x) - b[block[t]];
  }
}

void combine_rows(const DenseMatrix& a, std::span<const std::size_t> block,
                  std::span<const double> coef, std::span<double> out) {
  const std::size_t n = a.cols();
  if (block.empty()) {
    for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
    return;
  }
  const auto first = a.row(block[0]);
  for (std::size_t j = 0; j < n; ++j) out[j] = coef[0] * first[j];
  for (std::size_t t = 1; t < block.size(); ++t) {
    const auto r = a.row(block[t]);
    const double c = coef[t];
    for (std::size_t j = 0; j < n; ++j) out[j] += c * r[j];
  }
}

DenseMatrix gram_rows(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  DenseMatrix g(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k <= i; ++k) {
      const double v = dot(a.row(i), a.row(k));
      g(i, k) = v;
      g(k, i) = v;
    }
  }
  return g;
}

DenseMatrix weighted_gram_cols(const DenseMatrix& a, std::span<const double> d) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  DenseMatrix g(n, n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q <= p; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += d[i] * a(i, p) * a(i, q);
      g(p, q) = s;
      g(q, p) = s;
    }
  }
  return g;
}

}  // namespace kaczlab::kernels::serial
