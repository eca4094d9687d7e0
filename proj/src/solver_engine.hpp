#pragma once

// Validated, precomputed solver state shared by run_solver and the
// Monte-Carlo driver. Read-only after construction, so one engine can serve
// concurrent trials.

#include <optional>
#include <vector>

#include "kaczlab/solver.hpp"

namespace kaczlab::detail {

class SolverEngine {
 public:
  SolverEngine(const SolverConfig& config, const LinearSystem& system);

  /// One run seeded with `seed`. When `residuals` is non-null it receives
  /// A x^k - b for every event.
  SolverTrace run(std::uint64_t seed, std::vector<Vector>* residuals = nullptr) const;

  const SolverConfig& config() const noexcept { return config_; }
  double residual_tol() const noexcept { return tol_; }

 private:
  SolverConfig config_;
  const LinearSystem& system_;
  Vector row_norms_;
  Block all_rows_;
  Vector x0_;
  double tol_ = 0.0;
  std::optional<double> alpha_constant_;
  std::optional<double> adaptive_delta_;
  const ChebyshevSchedule* schedule_ = nullptr;
  std::optional<SolutionProjector> projector_;
};

}  // namespace kaczlab::detail
