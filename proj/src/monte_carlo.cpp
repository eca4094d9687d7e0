#include <cmath>
#include <cstdint>
#include <vector>

#include "kaczlab/rng.hpp"
#include "kaczlab/solver.hpp"
#include "solver_engine.hpp"

namespace kaczlab {

namespace {

constexpr std::size_t kTrialChunk = 64;

struct TrialRecord {
  Vector dist_sq;                   // K + 1
  Vector residual_norm;             // K + 1
  std::vector<Vector> iterates;     // K + 1 x n
  std::vector<Vector> residuals;    // K + 1 x m
  std::optional<std::size_t> hit;   // first k below the report tolerance
  TerminalStatus status = TerminalStatus::MaxIters;
};

// Welford running mean and second moment, updated in trial order.
class RunningMoments {
 public:
  explicit RunningMoments(std::size_t size = 0) : mean_(size, 0.0), m2_(size, 0.0) {}

  void add(std::span<const double> x, std::size_t count) {
    const double c = static_cast<double>(count);
    for (std::size_t i = 0; i < mean_.size(); ++i) {
      const double delta = x[i] - mean_[i];
      mean_[i] += delta / c;
      m2_[i] += delta * (x[i] - mean_[i]);
    }
  }

  const Vector& mean() const noexcept { return mean_; }

  Vector standard_error(std::size_t count) const {
    Vector se(mean_.size(), 0.0);
    if (count < 2) return se;
    const double c = static_cast<double>(count);
    for (std::size_t i = 0; i < se.size(); ++i) {
      se[i] = std::sqrt(std::max(m2_[i], 0.0) / ((c - 1.0) * c));
    }
    return se;
  }

 private:
  Vector mean_;
  Vector m2_;
};

TrialRecord run_trial(const detail::SolverEngine& engine, std::uint64_t seed, std::size_t horizon,
                      double report_tol) {
  std::vector<Vector> residuals;
  SolverTrace trace = engine.run(seed, &residuals);
  TrialRecord rec;
  rec.status = trace.status;
  rec.dist_sq.reserve(horizon + 1);
  rec.residual_norm.reserve(horizon + 1);
  rec.iterates.reserve(horizon + 1);
  rec.residuals.reserve(horizon + 1);
  for (std::size_t k = 0; k <= horizon; ++k) {
    const std::size_t e = std::min(k, trace.events.size() - 1);
    const IterationEvent& ev = trace.events[e];
    rec.dist_sq.push_back(ev.dist_sq);
    rec.residual_norm.push_back(ev.residual_norm);
    rec.iterates.push_back(*ev.iterate);
    rec.residuals.push_back(residuals[e]);
    if (!rec.hit && ev.residual_norm <= report_tol) rec.hit = k;
  }
  return rec;
}

}  // namespace

MonteCarloSummary run_monte_carlo(const SolverConfig& config, const LinearSystem& system,
                                  std::size_t trials, std::optional<double> report_tolerance) {
  if (trials == 0) throw Error(ErrorKind::ConfigMismatch, "trials must be >= 1");
  SolverConfig per_trial = config;
  per_trial.trace_level = TraceLevel::FullIterates;
  per_trial.backend = kernels::Backend::Serial;
  const detail::SolverEngine engine(per_trial, system);

  const std::size_t K = config.max_iters;
  const std::size_t m = system.rows();
  const std::size_t n = system.cols();
  const double report_tol = report_tolerance.value_or(engine.residual_tol());

  RunningMoments dist(K + 1);
  RunningMoments res_norm(K + 1);
  std::vector<RunningMoments> iter(K + 1, RunningMoments(n));
  std::vector<RunningMoments> res(K + 1, RunningMoments(m));

  MonteCarloSummary out;
  out.trials = trials;
  out.iterations = K;
  out.iterations_to_tolerance.reserve(trials);

  std::vector<TrialRecord> chunk;
  for (std::size_t start = 0; start < trials; start += kTrialChunk) {
    const std::size_t count = std::min(kTrialChunk, trials - start);
    chunk.assign(count, TrialRecord{});
    const auto count_i = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < count_i; ++c) {
      const std::uint64_t t = start + static_cast<std::size_t>(c);
      chunk[c] = run_trial(engine, split_seed(config.seed, t), K, report_tol);
    }
    for (std::size_t c = 0; c < count; ++c) {
      const std::size_t seen = start + c + 1;
      const TrialRecord& rec = chunk[c];
      dist.add(rec.dist_sq, seen);
      res_norm.add(rec.residual_norm, seen);
      for (std::size_t k = 0; k <= K; ++k) {
        iter[k].add(rec.iterates[k], seen);
        res[k].add(rec.residuals[k], seen);
      }
      out.iterations_to_tolerance.push_back(rec.hit);
      if (rec.status == TerminalStatus::Converged) ++out.converged;
      if (rec.status == TerminalStatus::Stalled) ++out.stalled;
    }
  }

  out.mean_dist_sq = dist.mean();
  out.stderr_dist_sq = dist.standard_error(trials);
  out.mean_residual_norm = res_norm.mean();
  out.aggregate_stderr_residual.resize(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    out.mean_iterate.push_back(iter[k].mean());
    out.stderr_iterate.push_back(iter[k].standard_error(trials));
    out.mean_residual.push_back(res[k].mean());
    Vector se = res[k].standard_error(trials);
    out.aggregate_stderr_residual[k] = std::sqrt(norm_sq(se));
    out.stderr_residual.push_back(std::move(se));
  }
  return out;
}

}  // namespace kaczlab
