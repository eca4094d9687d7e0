#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "kaczlab/dense.hpp"
#include "kaczlab/sampling.hpp"

namespace kaczlab {

// ---------------------------------------------------------------------------
// block weights

enum class WeightKind { Uniform, RowNormSq, Explicit };

/// How the per-row weights omega_i of a drawn block are formed. Realized
/// weights are always positive and sum to one over the block:
///   Uniform    omega_i = 1 / |J|
///   RowNormSq  omega_i = |a_i|^2 / sum_{j in J} |a_j|^2
///   Explicit   omega_i = v_i / sum_{j in J} v_j for a positive per-row vector v
struct WeightScheme {
  WeightKind kind = WeightKind::Uniform;
  Vector values;  // per-row v_i, Explicit only

  static WeightScheme uniform() { return {}; }
  static WeightScheme row_norm_sq() { return {WeightKind::RowNormSq, {}}; }
  static WeightScheme explicit_weights(Vector v);
};

struct WeightBounds {
  double omega_min = 1.0;
  double omega_max = 1.0;
};

void realize_weights(const WeightScheme& scheme, std::span<const double> row_norms_sq,
                     std::span<const std::size_t> block, std::span<double> out);
Vector realize_weights(const WeightScheme& scheme, std::span<const double> row_norms_sq,
                       std::span<const std::size_t> block);

/// Exact min / max realized weight over every support of `spec`.
WeightBounds weight_bounds(const WeightScheme& scheme, std::span<const double> row_norms_sq,
                           const SamplingSpec& spec);

// ---------------------------------------------------------------------------
// Chebyshev toolkit

/// T_k(x) by the three-term recurrence with T_0 = 1, T_1 = x.
double chebyshev_eval(std::size_t k, double x) noexcept;

/// Roots cos((2i - 1) pi / (2k)), i = 1..k, in descending order.
Vector chebyshev_roots(std::size_t k);

/// 1 / |T_k(-(u + ell) / (u - ell))|: the smallest achievable max_{[ell, u]} |P|
/// over degree-k polynomials with P(0) = 1.
double min_deviation_bound(double ell, double u, std::size_t k);

/// The optimal polynomial T_k^{(ell,u)}(x) / T_k^{(ell,u)}(0).
double chebyshev_residual_polynomial(double ell, double u, std::size_t k, double x);

/// Stepsizes for a fixed horizon k; alphas[j] is used at iteration j.
struct ChebyshevSchedule {
  Vector alphas;
  double ell = 0.0;  ///< lower end of the spectrum interval of (1/m) A A^T
  double u = 0.0;    ///< upper end
  std::vector<std::size_t> kappa;
  bool singular = false;

  std::size_t horizon() const noexcept { return alphas.size(); }
};

std::vector<std::size_t> identity_permutation(std::size_t k);

/// Leja ordering: start at the largest point, then repeatedly take the point
/// maximizing the product of distances to those already taken.
std::vector<std::size_t> leja_order(std::span<const double> points);

/// kappa applying the schedule's roots in Leja order. Bounds the growth of
/// the partial products, which the identity order does not once the
/// spectrum interval is wide.
std::vector<std::size_t> chebyshev_leja_kappa(std::size_t k, bool singular);

/// alpha_j = 2m / [(lmax + lmin) + (lmax - lmin) cos((2 kappa(j) + 1) pi / (2k))].
/// An empty kappa means the identity. Throws BadSpectrum unless 0 < lmin <= lmax.
ChebyshevSchedule chebyshev_schedule_pd(double lambda_min, double lambda_max, std::size_t m,
                                        std::size_t k, std::vector<std::size_t> kappa = {});

/// Schedule for singular A A^T built on the root of T_{k+1} closest to -1.
ChebyshevSchedule chebyshev_schedule_singular(double lambda_max, std::size_t m, std::size_t k,
                                              std::vector<std::size_t> kappa = {});

/// prod_j (1 - alphas[j] * lambda / m), evaluated in schedule order.
double schedule_polynomial(std::span<const double> alphas, std::size_t m, double lambda) noexcept;

// ---------------------------------------------------------------------------
// stepsize policies

struct ClassicConstant {
  double alpha = 1.0;
};

/// alpha = (2 - delta) omega_min / (omega_max^2 lambda_max_block). When
/// lambda_max_block is unset the solver computes it from the sampling.
struct ExtrapolatedConstant {
  double delta = 1.0;
  std::optional<double> lambda_max_block;
};

/// alpha_k = (2 - delta) L_k recomputed from every drawn block.
struct Adaptive {
  double delta = 1.0;
};

struct ChebyshevPD {
  ChebyshevSchedule schedule;
};

struct ChebyshevSingular {
  ChebyshevSchedule schedule;
};

using StepsizePolicy =
    std::variant<ClassicConstant, ExtrapolatedConstant, Adaptive, ChebyshevPD, ChebyshevSingular>;

double constant_extrapolated_alpha(const WeightBounds& weights, double lambda_max_block,
                                   double delta);

inline constexpr double kSkipDirectionThreshold = 1e-28;

struct AdaptiveStep {
  double alpha = 0.0;
  double L = 0.0;
};

/// L = numerator / |d|^2 with numerator = sum_i wbar_i r_i^2 and
/// d = sum_i wbar_i r_i a_i, wbar_i = omega_i / |a_i|^2. Returns nullopt
/// (skip the update) when the numerator vanishes or |d|^2 < 1e-28.
std::optional<AdaptiveStep> adaptive_alpha_from(double numerator, double direction_norm_sq,
                                                double delta);

std::optional<AdaptiveStep> adaptive_alpha(const DenseMatrix& block_rows,
                                           std::span<const double> residuals,
                                           std::span<const double> weights, double delta);

}  // namespace kaczlab
