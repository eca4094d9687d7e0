#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kaczlab/analysis.hpp"
#include "kaczlab/config.hpp"
#include "kaczlab/serialize.hpp"

namespace kaczlab {

/// Entry point of the `kaczlab` tool. `args` excludes the program name.
/// Exit codes: 0 success or Converged, 2 MaxIters, 3 Stalled, 1 error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Per-iteration contraction factor of E|x^k - x_k^*|^2 promised for this
/// configuration, or nullopt when no squared-distance bound applies
/// (block projection, Chebyshev schedules).
struct TheoryFactor {
  std::string theorem;  ///< "basic", "constant-stepsize", "adaptive" or "none"
  std::optional<double> factor;
  std::optional<double> alpha;
  BlockLambda lambda_block;
};

TheoryFactor theory_factor(const SolverConfig& config, const LinearSystem& system);

/// Runs every configuration of an experiment plan, writes one CSV per
/// configuration into `out_dir` and returns the summary document (also
/// written to out_dir/summary.json).
Json run_experiment(const Json& plan, const std::filesystem::path& out_dir);

}  // namespace kaczlab
