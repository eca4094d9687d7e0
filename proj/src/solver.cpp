#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <type_traits>

#include "kaczlab/analysis.hpp"
#include "kaczlab/solver.hpp"
#include "solver_engine.hpp"

namespace kaczlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_chebyshev(const StepsizePolicy& p) {
  return std::holds_alternative<ChebyshevPD>(p) || std::holds_alternative<ChebyshevSingular>(p);
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Basic: return "basic";
    case Method::RBK: return "rbk";
    case Method::BlockProjection: return "block-projection";
  }
  return "unknown";
}

std::string_view to_string(TraceLevel t) noexcept {
  return t == TraceLevel::FullIterates ? "full-iterates" : "norms-only";
}

std::string_view to_string(TerminalStatus s) noexcept {
  switch (s) {
    case TerminalStatus::Converged: return "converged";
    case TerminalStatus::MaxIters: return "max-iters";
    case TerminalStatus::Stalled: return "stalled";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// single steps

Vector basic_kaczmarz_step(std::span<const double> x, std::span<const double> row, double b_i,
                           double alpha) {
  if (x.size() != row.size()) throw Error(ErrorKind::DimensionMismatch, "basic step: |x| != |row|");
  const double nrm = norm_sq(row);
  if (nrm < kZeroRowTolerance * kZeroRowTolerance) {
    throw Error(ErrorKind::ZeroRow, "basic step on a zero row");
  }
  const double c = (dot(row, x) - b_i) / nrm;
  Vector out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] - alpha * (c * row[j]);
  return out;
}

Vector rbk_step(std::span<const double> x, const LinearSystem& system,
                std::span<const std::size_t> block, std::span<const double> weights, double alpha,
                kernels::Backend backend) {
  const DenseMatrix& a = system.matrix();
  if (x.size() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "rbk step: |x| != cols(A)");
  if (block.empty()) throw Error(ErrorKind::BadSampling, "rbk step on an empty block");
  if (weights.size() != block.size()) {
    throw Error(ErrorKind::DimensionMismatch, "rbk step: one weight per block row");
  }
  const std::size_t tau = block.size();
  Vector r(tau);
  kernels::block_residuals(backend, a, system.rhs(), block, x, r);
  Vector coef(tau);
  for (std::size_t t = 0; t < tau; ++t) {
    if (block[t] >= a.rows()) throw Error(ErrorKind::IndexOutOfRange, "rbk step");
    const double nrm = norm_sq(a.row(block[t]));
    if (nrm < kZeroRowTolerance * kZeroRowTolerance) {
      throw Error(ErrorKind::ZeroRow, "row " + std::to_string(block[t]) + " is zero");
    }
    coef[t] = weights[t] * (r[t] / nrm);
  }
  Vector d(a.cols());
  kernels::combine_rows(backend, a, block, coef, d);
  Vector out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] - alpha * d[j];
  return out;
}

Vector block_projection_step(std::span<const double> x, const LinearSystem& system,
                             std::span<const std::size_t> block, double alpha) {
  const DenseMatrix& a = system.matrix();
  if (x.size() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "block projection: |x| != cols(A)");
  }
  if (block.empty()) throw Error(ErrorKind::BadSampling, "block projection on an empty block");
  Vector r(block.size());
  kernels::serial::block_residuals(a, system.rhs(), block, x, r);
  const Vector c = least_squares_min_norm(select_rows(a, block), r);
  Vector out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] - alpha * c[j];
  return out;
}

// ---------------------------------------------------------------------------
// engine

namespace detail {

SolverEngine::SolverEngine(const SolverConfig& config, const LinearSystem& system)
    : config_(config), system_(system) {
  const DenseMatrix& a = system.matrix();
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();

  if (config_.sampling.rows() == 0) throw Error(ErrorKind::ConfigMismatch, "sampling is not set");
  if (config_.sampling.rows() != m) {
    throw Error(ErrorKind::DimensionMismatch, "sampling is over " +
                                                  std::to_string(config_.sampling.rows()) +
                                                  " rows but A has " + std::to_string(m));
  }
  if (config_.max_iters == 0) throw Error(ErrorKind::ConfigMismatch, "max_iters must be >= 1");
  if (config_.residual_tol && !(*config_.residual_tol >= 0.0)) {
    throw Error(ErrorKind::ConfigMismatch, "residual_tol must be >= 0");
  }
  if (config_.weights.kind == WeightKind::Explicit && config_.weights.values.size() != m) {
    throw Error(ErrorKind::BadWeights, "explicit weights need one value per row");
  }
  if (config_.method == Method::Basic && config_.sampling.max_block_size() != 1) {
    throw Error(ErrorKind::ConfigMismatch, "basic Kaczmarz needs single-row sampling");
  }

  row_norms_ = row_norms_sq(a);
  for (std::size_t i = 0; i < m; ++i) {
    if (row_norms_[i] < kZeroRowTolerance * kZeroRowTolerance) {
      throw Error(ErrorKind::ZeroRow, "row " + std::to_string(i) + " is zero");
    }
  }
  all_rows_.resize(m);
  std::iota(all_rows_.begin(), all_rows_.end(), std::size_t{0});

  x0_ = config_.x0.value_or(Vector(n, 0.0));
  if (x0_.size() != n) throw Error(ErrorKind::DimensionMismatch, "x0 length != cols(A)");
  for (double v : x0_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "x0 has NaN/Inf");
  }
  tol_ = config_.residual_tol.value_or(1e-8 * (1.0 + norm(system.rhs())));

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ClassicConstant>) {
          if (!std::isfinite(p.alpha)) throw Error(ErrorKind::ConfigMismatch, "alpha is not finite");
          alpha_constant_ = p.alpha;
        } else if constexpr (std::is_same_v<P, ExtrapolatedConstant>) {
          const double lb =
              p.lambda_max_block
                  ? *p.lambda_max_block
                  : block_lambda_max(system, config_.sampling, config_.lambda_block_budget,
                                     config_.seed, config_.backend)
                        .value;
          const WeightBounds wb = weight_bounds(config_.weights, row_norms_, config_.sampling);
          alpha_constant_ = constant_extrapolated_alpha(wb, lb, p.delta);
        } else if constexpr (std::is_same_v<P, Adaptive>) {
          if (!(p.delta > 0.0 && p.delta <= 1.0)) {
            throw Error(ErrorKind::ConfigMismatch, "delta must lie in (0, 1]");
          }
          if (config_.method == Method::BlockProjection) {
            throw Error(ErrorKind::ConfigMismatch,
                        "the adaptive stepsize is defined for averaged updates only");
          }
          adaptive_delta_ = p.delta;
        } else {
          schedule_ = &p.schedule;
        }
      },
      config_.stepsize);

  if (is_chebyshev(config_.stepsize)) {
    if (config_.max_iters > schedule_->horizon()) {
      throw Error(ErrorKind::ConfigMismatch,
                  "max_iters " + std::to_string(config_.max_iters) +
                      " exceeds the Chebyshev horizon " + std::to_string(schedule_->horizon()));
    }
    if (std::holds_alternative<ChebyshevPD>(config_.stepsize)) {
      const SpectralSummary s = gram_spectrum(a);
      if (s.rank_estimate < m) {
        throw Error(ErrorKind::ConfigMismatch,
                    "Chebyshev-PD needs lambda_min(A A^T) > 0 but rank(A) = " +
                        std::to_string(s.rank_estimate) + " < m = " + std::to_string(m));
      }
    }
  }

  if (config_.diagnostics || !system.planted_solution()) projector_.emplace(system);
}

SolverTrace SolverEngine::run(std::uint64_t seed, std::vector<Vector>* residuals) const {
  const DenseMatrix& a = system_.matrix();
  const Vector& b = system_.rhs();
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const kernels::Backend be = config_.backend;
  const bool keep_iterates = config_.trace_level == TraceLevel::FullIterates;

  SolverTrace trace;
  trace.config = config_;
  trace.config.seed = seed;
  trace.residual_tol = tol_;
  trace.alpha_constant = alpha_constant_;
  trace.events.reserve(config_.max_iters + 1);

  Rng rng = make_rng(seed);
  Vector x = x0_;
  Vector r_full(m);
  Vector r_block(m);
  Vector weights(m);
  Vector coef(m);
  Vector d(n);

  auto record = [&](IterationEvent ev) {
    kernels::block_residuals(be, a, b, all_rows_, x, r_full);
    ev.residual_norm = norm(r_full);
    if (!std::isfinite(ev.residual_norm)) {
      throw Error(ErrorKind::NonFinite, "iterate diverged at k = " + std::to_string(ev.k));
    }
    ev.dist_sq = projector_ && config_.diagnostics ? projector_->dist_sq_from_residual(r_full) : kNaN;
    if (keep_iterates) ev.iterate = x;
    if (residuals) residuals->push_back(r_full);
    trace.events.push_back(std::move(ev));
    return trace.events.back().residual_norm;
  };

  IterationEvent first;
  first.alpha = kNaN;
  first.L = kNaN;
  if (record(std::move(first)) <= tol_) {
    trace.status = TerminalStatus::Converged;
    trace.final_iterate = x;
    return trace;
  }

  std::size_t consecutive_skips = 0;
  trace.status = TerminalStatus::MaxIters;
  for (std::size_t k = 0; k < config_.max_iters; ++k) {
    IterationEvent ev;
    ev.k = k + 1;
    ev.L = kNaN;
    ev.block = sample_block(config_.sampling, rng);
    const Block& J = ev.block;
    const std::size_t tau = J.size();

    kernels::block_residuals(be, a, b, J, x, std::span<double>(r_block).first(tau));

    double alpha = kNaN;
    if (alpha_constant_) {
      alpha = *alpha_constant_;
    } else if (schedule_) {
      alpha = schedule_->alphas[k];
    }

    if (config_.method == Method::BlockProjection) {
      const Vector c = least_squares_min_norm(select_rows(a, J),
                                              std::span<const double>(r_block).first(tau));
      for (std::size_t j = 0; j < n; ++j) x[j] = x[j] - alpha * c[j];
    } else if (config_.method == Method::Basic && !adaptive_delta_) {
      const auto row = a.row(J[0]);
      const double c = r_block[0] / row_norms_[J[0]];
      for (std::size_t j = 0; j < n; ++j) x[j] = x[j] - alpha * (c * row[j]);
    } else {
      if (config_.method == Method::Basic) {
        weights[0] = 1.0;
      } else {
        realize_weights(config_.weights, row_norms_, J, std::span<double>(weights).first(tau));
      }
      for (std::size_t t = 0; t < tau; ++t) coef[t] = weights[t] * (r_block[t] / row_norms_[J[t]]);
      kernels::combine_rows(be, a, J, std::span<const double>(coef).first(tau), d);
      if (adaptive_delta_) {
        double numerator = 0.0;
        for (std::size_t t = 0; t < tau; ++t) numerator += coef[t] * r_block[t];
        const auto step = adaptive_alpha_from(numerator, norm_sq(d), *adaptive_delta_);
        if (step) {
          alpha = step->alpha;
          ev.L = step->L;
        } else {
          ev.skipped = true;
        }
      }
      if (!ev.skipped) {
        for (std::size_t j = 0; j < n; ++j) x[j] = x[j] - alpha * d[j];
      }
    }
    ev.alpha = ev.skipped ? kNaN : alpha;

    if (ev.skipped) {
      ++trace.skipped_updates;
      ++consecutive_skips;
    } else {
      consecutive_skips = 0;
    }

    if (record(std::move(ev)) <= tol_) {
      trace.status = TerminalStatus::Converged;
      break;
    }
    if (consecutive_skips >= kStallLimit) {
      trace.status = TerminalStatus::Stalled;
      break;
    }
  }
  trace.final_iterate = x;
  return trace;
}

}  // namespace detail

SolverTrace run_solver(const SolverConfig& config, const LinearSystem& system) {
  const detail::SolverEngine engine(config, system);
  return engine.run(config.seed);
}

}  // namespace kaczlab
