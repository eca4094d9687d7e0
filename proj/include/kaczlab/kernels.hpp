#pragma once

// Data-parallel inner loops. Each kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp. The two produce
// bit-identical results: work is split across output entries only, and every
// output entry is accumulated in ascending index order.

#include <cstddef>
#include <span>

#include "kaczlab/dense.hpp"

namespace kaczlab::kernels {

enum class Backend { Serial, OpenMP };

namespace serial {

/// out[t] = <a_{J[t]}, x> - b_{J[t]}
void block_residuals(const DenseMatrix& a, std::span<const double> b,
                     std::span<const std::size_t> block, std::span<const double> x,
                     std::span<double> out);

/// out = sum_t coef[t] a_{J[t]}, reduced in the order of `block`.
void combine_rows(const DenseMatrix& a, std::span<const std::size_t> block,
                  std::span<const double> coef, std::span<double> out);

/// A A^T (m x m)
DenseMatrix gram_rows(const DenseMatrix& a);

/// A^T diag(d) A (n x n)
DenseMatrix weighted_gram_cols(const DenseMatrix& a, std::span<const double> d);

}  // namespace serial

namespace omp {

void block_residuals(const DenseMatrix& a, std::span<const double> b,
                     std::span<const std::size_t> block, std::span<const double> x,
                     std::span<double> out);
void combine_rows(const DenseMatrix& a, std::span<const std::size_t> block,
                  std::span<const double> coef, std::span<double> out);
DenseMatrix gram_rows(const DenseMatrix& a);
DenseMatrix weighted_gram_cols(const DenseMatrix& a, std::span<const double> d);

/// Number of threads an OpenMP parallel region would use (1 without OpenMP).
int max_threads() noexcept;

}  // namespace omp

inline void block_residuals(Backend be, const DenseMatrix& a, std::span<const double> b,
                            std::span<const std::size_t> block, std::span<const double> x,
                            std::span<double> out) {
  be == Backend::OpenMP ? omp::block_residuals(a, b, block, x, out)
                        : serial::block_residuals(a, b, block, x, out);
}

inline void combine_rows(Backend be, const DenseMatrix& a, std::span<const std::size_t> block,
                         std::span<const double> coef, std::span<double> out) {
  be == Backend::OpenMP ? omp::combine_rows(a, block, coef, out)
                        : serial::combine_rows(a, block, coef, out);
}

inline DenseMatrix gram_rows(Backend be, const DenseMatrix& a) {
  return be == Backend::OpenMP ? omp::gram_rows(a) : serial::gram_rows(a);
}

inline DenseMatrix weighted_gram_cols(Backend be, const DenseMatrix& a,
                                      std::span<const double> d) {
  return be == Backend::OpenMP ? omp::weighted_gram_cols(a, d)
                               : serial::weighted_gram_cols(a, d);
}

}  // namespace kaczlab::kernels
