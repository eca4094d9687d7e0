#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kaczlab/dense.hpp"
#include "kaczlab/kernels.hpp"
#include "kaczlab/sampling.hpp"
#include "kaczlab/stepsize.hpp"

namespace kaczlab {

enum class Method { Basic, RBK, BlockProjection };
enum class TraceLevel { NormsOnly, FullIterates };
enum class TerminalStatus { Converged, MaxIters, Stalled };

std::string_view to_string(Method m) noexcept;
std::string_view to_string(TraceLevel t) noexcept;
std::string_view to_string(TerminalStatus s) noexcept;

inline constexpr std::size_t kStallLimit = 100;

struct SolverConfig {
  Method method = Method::RBK;
  SamplingSpec sampling;
  WeightScheme weights;
  StepsizePolicy stepsize = ClassicConstant{1.0};
  std::size_t max_iters = 1000;
  /// Unset means 1e-8 (1 + |b|).
  std::optional<double> residual_tol;
  std::uint64_t seed = 0;
  TraceLevel trace_level = TraceLevel::NormsOnly;
  /// Record |x^k - Pi_X(x^k)|^2 in every event.
  bool diagnostics = true;
  /// Unset means the zero vector.
  std::optional<Vector> x0;
  /// Supports examined when ExtrapolatedConstant has to estimate lambda_max_block.
  std::size_t lambda_block_budget = 20000;
  kernels::Backend backend = kernels::Backend::OpenMP;
};

/// State after iteration k. `block` and `alpha` belong to the update that
/// produced x^k; event 0 carries an empty block and a NaN alpha.
struct IterationEvent {
  std::size_t k = 0;
  Block block;
  double alpha = 0.0;
  bool skipped = false;
  /// L_k of the adaptive rule; NaN for other policies.
  double L = 0.0;
  double residual_norm = 0.0;
  /// NaN when diagnostics are off.
  double dist_sq = 0.0;
  std::optional<Vector> iterate;
};

struct SolverTrace {
  SolverConfig config;
  double residual_tol = 0.0;
  /// Constant stepsize actually used, when the policy has one.
  std::optional<double> alpha_constant;
  std::vector<IterationEvent> events;
  TerminalStatus status = TerminalStatus::MaxIters;
  std::size_t skipped_updates = 0;
  Vector final_iterate;

  std::size_t iterations() const noexcept { return events.empty() ? 0 : events.back().k; }
};

/// x - alpha ((<row, x> - b_i) / |row|^2) row. Throws ZeroRow.
Vector basic_kaczmarz_step(std::span<const double> x, std::span<const double> row, double b_i,
                           double alpha);

/// x - alpha sum_{i in J} omega_i ((<a_i, x> - b_i) / |a_i|^2) a_i, reduced in
/// the order of J.
Vector rbk_step(std::span<const double> x, const LinearSystem& system,
                std::span<const std::size_t> block, std::span<const double> weights, double alpha,
                kernels::Backend backend = kernels::Backend::OpenMP);

/// x - alpha A_J^+ (A_J x - b_J)
Vector block_projection_step(std::span<const double> x, const LinearSystem& system,
                             std::span<const std::size_t> block, double alpha);

/// Throws Inconsistent, ConfigMismatch, DimensionMismatch.
SolverTrace run_solver(const SolverConfig& config, const LinearSystem& system);

struct MonteCarloSummary {
  std::size_t trials = 0;
  std::size_t iterations = 0;  ///< K; every per-iteration series has K + 1 entries
  Vector mean_dist_sq;
  Vector stderr_dist_sq;
  std::vector<Vector> mean_iterate;
  std::vector<Vector> stderr_iterate;
  /// Componentwise mean of A x^k - b and its standard errors.
  std::vector<Vector> mean_residual;
  std::vector<Vector> stderr_residual;
  /// sqrt(sum_i stderr_i^2) of the mean residual vector.
  Vector aggregate_stderr_residual;
  Vector mean_residual_norm;
  /// First k with |A x^k - b| <= report tolerance, per trial.
  std::vector<std::optional<std::size_t>> iterations_to_tolerance;
  std::size_t converged = 0;
  std::size_t stalled = 0;
};

/// Runs `trials` independent copies of the solver; trial t is seeded with
/// split_seed(config.seed, t). A trial that stops early keeps its last iterate
/// for the remaining iterations. Aggregation is in trial order, so the result
/// does not depend on the thread count.
MonteCarloSummary run_monte_carlo(const SolverConfig& config, const LinearSystem& system,
                                  std::size_t trials,
                                  std::optional<double> report_tolerance = std::nullopt);

}  // namespace kaczlab
