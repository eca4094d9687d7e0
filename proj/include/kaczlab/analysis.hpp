#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "kaczlab/dense.hpp"
#include "kaczlab/kernels.hpp"
#include "kaczlab/sampling.hpp"
#include "kaczlab/stepsize.hpp"

namespace kaczlab {

enum class LambdaBlockMode { ExactEnumeration, PartitionMax, MonteCarloEstimate };

std::string_view to_string(LambdaBlockMode mode) noexcept;

struct BlockLambda {
  double value = 0.0;
  LambdaBlockMode mode = LambdaBlockMode::PartitionMax;
  std::size_t samples = 0;  ///< supports examined
};

/// lambda_max(A_J^T diag(1/|a_i|^2) A_J), evaluated on the smaller of the
/// |J| x |J| and n x n Gram forms.
double block_gram_lambda_max(const DenseMatrix& a, std::span<const double> row_norms_sq,
                             std::span<const std::size_t> block);

/// Stochastic conditioning parameter: max over supports of P of the block
/// Gram lambda_max. Exact for partitions and for enumerable uniform subsets;
/// otherwise the maximum over `budget` sampled supports, which is a lower
/// bound on the true value.
BlockLambda block_lambda_max(const LinearSystem& system, const SamplingSpec& spec,
                             std::size_t budget = 20000, std::uint64_t seed = 0,
                             kernels::Backend backend = kernels::Backend::OpenMP);

/// W = A^T diag(p_i / |a_i|^2) A
DenseMatrix build_W(const LinearSystem& system, const SamplingSpec& spec);

struct ConditioningReport {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t tau_min = 0;
  std::size_t tau_max = 0;
  double lambda_max_block = 0.0;
  LambdaBlockMode lambda_max_block_mode = LambdaBlockMode::PartitionMax;
  std::size_t lambda_max_block_samples = 0;
  DenseMatrix W;
  double lambda_min_nz_W = 0.0;
  double lambda_max_W = 0.0;
  double spectral_sq = 0.0;       ///< |A|^2
  double frobenius_sq = 0.0;      ///< |A|_F^2
  double lambda_min_AAt = 0.0;    ///< 0 whenever m > rank(A)
  double lambda_max_AAt = 0.0;
  double lambda_min_nz_AtA = 0.0;
  std::size_t rank = 0;
};

ConditioningReport conditioning_report(const LinearSystem& system, const SamplingSpec& spec,
                                       std::size_t budget = 20000, std::uint64_t seed = 0);

struct RatePrediction {
  double rate_basic = 1.0;              ///< 1 - lambda_min_nz(A^T A) / |A|_F^2
  double rate_constant_stepsize = 1.0;  ///< extrapolated constant stepsize
  double rate_adaptive = 1.0;           ///< adaptive stepsize
  double rate_paving = 1.0;             ///< random paving, 6 ln(1+m) block bound
  std::optional<double> cheb_factor;    ///< (sqrt u - sqrt l)/(sqrt u + sqrt l); needs lambda_min > 0
  double speedup_vs_basic = 1.0;        ///< tau / lambda_max_block
  bool diversity_ok = false;            ///< |A|^2 < m / (6 ln(1+m))
  bool optimistic = false;              ///< lambda_max_block came from sampling
};

/// Per-iteration contraction factors of E|x^k - x_k^*|^2. Throws
/// MissingSpectrum when the report lacks the eigenvalues a rate needs.
RatePrediction predict_rates(const ConditioningReport& report, const WeightBounds& weights,
                             double delta, std::size_t tau);

/// 1 - alpha (2 - alpha) lambda_min_nz(A^T A) / |A|_F^2 (single-row Kaczmarz).
double basic_rate(double alpha, double lambda_min_nz_AtA, double frobenius_sq);

/// 1 - (2 alpha omega_min - alpha^2 omega_max^2 lambda_max_block) lambda_min_nz(W):
/// the one-step contraction for any constant stepsize alpha. Values >= 1 mean
/// no decrease is guaranteed.
double constant_stepsize_rate(double alpha, const WeightBounds& weights,
                              double lambda_max_block, double lambda_min_nz_W);

struct PavingQuality {
  double lambda_max_block = 0.0;
  double bound = 0.0;       ///< 6 ln(1+m), used for the verdict
  double bound_log2 = 0.0;  ///< 6 log2(1+m), reported alongside
  bool satisfied = false;
  bool satisfied_log2 = false;
};

/// Throws NotNormalized unless every row has unit norm.
PavingQuality paving_quality(const LinearSystem& system, const Paving& paving);

}  // namespace kaczlab
