#pragma once

// System-independent run descriptions. A descriptor names a sampling rule and
// a stepsize policy symbolically ("uniform:4", "chebyshev-pd"); resolving it
// against a concrete system fills in everything that depends on A.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kaczlab/sampling.hpp"
#include "kaczlab/solver.hpp"
#include "kaczlab/stepsize.hpp"

namespace kaczlab {

enum class SamplingKind { Uniform, FullBatch, Paving, Aligned, Partition };
enum class BlockProbabilities { Uniform, Frobenius, Explicit };

struct SamplingDescriptor {
  SamplingKind kind = SamplingKind::Uniform;
  std::size_t tau = 1;         ///< Uniform
  std::size_t ell = 0;         ///< Paving; 0 means ceil(|A|^2)
  std::size_t block_size = 0;  ///< Aligned
  std::optional<std::uint64_t> paving_seed;  ///< Paving; defaults to the run seed
  std::vector<Block> blocks;   ///< Partition, 0-based
  BlockProbabilities probabilities = BlockProbabilities::Uniform;
  Vector probs;                ///< Partition with Explicit probabilities
};

/// `uniform:T`, `fullbatch`, `paving[:L]`, `aligned:B`.
SamplingDescriptor parse_sampling(std::string_view text);
std::string to_string(const SamplingDescriptor& s);

/// Order in which a Chebyshev schedule applies its roots.
enum class KappaOrder { Identity, Leja, Random };

std::string_view to_string(KappaOrder k) noexcept;
KappaOrder parse_kappa_order(std::string_view text);

enum class StepsizeKind { Constant, ConstantExtrapolated, Adaptive, ChebyshevPD, ChebyshevSingular };

std::string_view to_string(StepsizeKind k) noexcept;
StepsizeKind parse_stepsize_kind(std::string_view text);

struct StepsizeDescriptor {
  StepsizeKind kind = StepsizeKind::Constant;
  double alpha = 1.0;
  double delta = 1.0;
  std::optional<double> lambda_max_block;
  /// Spectrum of A A^T for the Chebyshev schedules; computed when unset.
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  /// Chebyshev horizon; defaults to max_iters.
  std::optional<std::size_t> horizon;
  /// Explicit order of the schedule roots; when empty, kappa_order decides.
  std::vector<std::size_t> kappa;
  KappaOrder kappa_order = KappaOrder::Identity;
  /// Random order only; defaults to the run seed.
  std::optional<std::uint64_t> kappa_seed;
};

Method parse_method(std::string_view text);
WeightScheme parse_weights(std::string_view text);
std::string_view weights_name(const WeightScheme& w) noexcept;

struct RunDescriptor {
  std::string name;
  Method method = Method::RBK;
  SamplingDescriptor sampling;
  WeightScheme weights;
  StepsizeDescriptor stepsize;
  std::size_t max_iters = 1000;
  std::optional<double> residual_tol;
  std::uint64_t seed = 0;
  TraceLevel trace_level = TraceLevel::NormsOnly;
  bool diagnostics = true;
  std::optional<Vector> x0;
  std::size_t lambda_block_budget = 20000;
};

SamplingSpec resolve_sampling(const SamplingDescriptor& d, const LinearSystem& system,
                              std::uint64_t run_seed);

/// Builds the concrete solver configuration. Throws ConfigMismatch when a
/// Chebyshev-PD schedule is requested for a system with lambda_min(A A^T) = 0.
SolverConfig resolve_config(const RunDescriptor& d, const LinearSystem& system);

}  // namespace kaczlab
