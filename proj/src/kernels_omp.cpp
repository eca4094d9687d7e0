#include "kaczlab/kernels.hpp"

#include <cstdint>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace kaczlab::kernels::omp {

namespace {
// Below this many flops the fork/join overhead dominates.
constexpr std::size_t kMinParallelWork = 1 << 14;
}  // namespace

void block_residuals(const DenseMatrix& a, std::span<const double> b,
                     std::span<const std::size_t> block, std::span<const double> x,
                     std::span<double> out) {
  const auto count = static_cast<std::int64_t>(block.size());
  const bool big = block.size() * a.cols() >= kMinParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::int64_t t = 0; t < count; ++t) {
    out[t] = dot(a.row(block[t]), x) - b[block[t]];
  }
}

void combine_rows(const DenseMatrix& a, std::span<const std::size_t> block,
                  std::span<const double> coef, std::span<double> out) {
  // Column-parallel: every out[j] sums its terms in block order, exactly as
  // the serial reference does.
  const auto n = static_cast<std::int64_t>(a.cols());
  const std::size_t tau = block.size();
  const bool big = tau * a.cols() >= kMinParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::int64_t j = 0; j < n; ++j) {
    if (tau == 0) {
      out[j] = 0.0;
      continue;
    }
    double s = coef[0] * a(block[0], j);
    for (std::size_t t = 1; t < tau; ++t) s += coef[t] * a(block[t], j);
    out[j] = s;
  }
}

DenseMatrix gram_rows(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  DenseMatrix g(m, m);
  const auto mm = static_cast<std::int64_t>(m);
  const bool big = m * m * a.cols() >= kMinParallelWork;
#pragma omp parallel for schedule(dynamic, 4) if (big)
  for (std::int64_t i = 0; i < mm; ++i) {
    for (std::int64_t k = 0; k <= i; ++k) {
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
  const auto nn = static_cast<std::int64_t>(n);
  const bool big = n * n * m >= kMinParallelWork;
#pragma omp parallel for schedule(dynamic, 4) if (big)
  for (std::int64_t p = 0; p < nn; ++p) {
    for (std::int64_t q = 0; q <= p; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += d[i] * a(i, p) * a(i, q);
      g(p, q) = s;
      g(q, p) = s;
    }
  }
  return g;
}

int max_threads() noexcept {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace kaczlab::kernels::omp
