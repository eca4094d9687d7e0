#include "kaczlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace kaczlab {

std::string_view to_string(LambdaBlockMode mode) noexcept {
  switch (mode) {
    case LambdaBlockMode::ExactEnumeration: return "exact-enumeration";
    case LambdaBlockMode::PartitionMax: return "partition-max";
    case LambdaBlockMode::MonteCarloEstimate: return "monte-carlo-estimate";
  }
  return "unknown";
}

double block_gram_lambda_max(const DenseMatrix& a, std::span<const double> row_norms_sq,
                             std::span<const std::size_t> block) {
  const std::size_t tau = block.size();
  if (tau == 0) return 0.0;
  if (tau == 1) return 1.0;
  if (tau <= a.cols()) {
    // D^{1/2} A_J A_J^T D^{1/2}: cosines between the block rows
    DenseMatrix g(tau, tau);
    for (std::size_t s = 0; s < tau; ++s) {
      for (std::size_t t = 0; t <= s; ++t) {
        const double v = dot(a.row(block[s]), a.row(block[t])) /
                         std::sqrt(row_norms_sq[block[s]] * row_norms_sq[block[t]]);
        g(s, t) = v;
        g(t, s) = v;
      }
    }
    return sym_eigenvalues(g).lambda_max;
  }
  const std::size_t n = a.cols();
  DenseMatrix g(n, n);
  for (std::size_t i : block) {
    const auto r = a.row(i);
    const double w = 1.0 / row_norms_sq[i];
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q <= p; ++q) g(p, q) += w * r[p] * r[q];
  }
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < p; ++q) g(q, p) = g(p, q);
  return sym_eigenvalues(g).lambda_max;
}

BlockLambda block_lambda_max(const LinearSystem& system, const SamplingSpec& spec,
                             std::size_t budget, std::uint64_t seed, kernels::Backend backend) {
  const DenseMatrix& a = system.matrix();
  const Vector norms = row_norms_sq(a);

  std::vector<Block> supports;
  BlockLambda out;
  if (const auto* p = spec.as_partition()) {
    for (std::size_t l = 0; l < p->blocks.size(); ++l) {
      if (p->probs[l] > 0.0) supports.push_back(p->blocks[l]);
    }
    out.mode = LambdaBlockMode::PartitionMax;
  } else {
    const auto* u = spec.as_uniform();
    if (binomial_capped(u->m, u->tau, kSupportEnumerationCap)) {
      for (auto& s : enumerate_supports(spec)) supports.push_back(std::move(s.block));
      out.mode = LambdaBlockMode::ExactEnumeration;
    } else {
      if (budget == 0) throw Error(ErrorKind::BadSampling, "sampling budget must be >= 1");
      Rng rng = make_rng(seed);
      supports.reserve(budget);
      for (std::size_t s = 0; s < budget; ++s) supports.push_back(sample_block(spec, rng));
      out.mode = LambdaBlockMode::MonteCarloEstimate;
    }
  }

  Vector values(supports.size());
  const auto count = static_cast<std::int64_t>(supports.size());
  if (backend == kernels::Backend::OpenMP) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t s = 0; s < count; ++s) {
      values[s] = block_gram_lambda_max(a, norms, supports[s]);
    }
  } else {
    for (std::int64_t s = 0; s < count; ++s) {
      values[s] = block_gram_lambda_max(a, norms, supports[s]);
    }
  }
  out.value = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  out.samples = supports.size();
  return out;
}

DenseMatrix build_W(const LinearSystem& system, const SamplingSpec& spec) {
  const DenseMatrix& a = system.matrix();
  if (spec.rows() != a.rows()) throw Error(ErrorKind::DimensionMismatch, "sampling m != rows(A)");
  const Vector norms = row_norms_sq(a);
  Vector d(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) d[i] = membership_probability(spec, i) / norms[i];
  return kernels::weighted_gram_cols(kernels::Backend::OpenMP, a, d);
}

ConditioningReport conditioning_report(const LinearSystem& system, const SamplingSpec& spec,
                                       std::size_t budget, std::uint64_t seed) {
  const DenseMatrix& a = system.matrix();
  ConditioningReport r;
  r.m = a.rows();
  r.n = a.cols();
  r.tau_min = spec.min_block_size();
  r.tau_max = spec.max_block_size();

  const BlockLambda bl = block_lambda_max(system, spec, budget, seed);
  r.lambda_max_block = bl.value;
  r.lambda_max_block_mode = bl.mode;
  r.lambda_max_block_samples = bl.samples;

  r.W = build_W(system, spec);
  const SpectralSummary ws = sym_eigenvalues(r.W);
  r.lambda_min_nz_W = ws.lambda_min_nz;
  r.lambda_max_W = ws.lambda_max;

  const SpectralSummary gs = gram_spectrum(a);
  r.spectral_sq = gs.lambda_max;
  r.frobenius_sq = frobenius_sq(a);
  r.lambda_max_AAt = gs.lambda_max;
  r.lambda_min_nz_AtA = gs.lambda_min_nz;
  r.rank = gs.rank_estimate;
  r.lambda_min_AAt = (r.rank == r.m) ? gs.lambda_min_nz : 0.0;
  return r;
}

double basic_rate(double alpha, double lambda_min_nz_AtA, double frobenius_sq) {
  return 1.0 - alpha * (2.0 - alpha) * lambda_min_nz_AtA / frobenius_sq;
}

double constant_stepsize_rate(double alpha, const WeightBounds& weights,
                              double lambda_max_block, double lambda_min_nz_W) {
  const double decrease = 2.0 * alpha * weights.omega_min -
                          alpha * alpha * weights.omega_max * weights.omega_max * lambda_max_block;
  return 1.0 - decrease * lambda_min_nz_W;
}

RatePrediction predict_rates(const ConditioningReport& report, const WeightBounds& weights,
                             double delta, std::size_t tau) {
  if (!(report.lambda_max_block > 0.0) || !(report.lambda_min_nz_W > 0.0) ||
      !(report.frobenius_sq > 0.0) || !(report.spectral_sq > 0.0) ||
      !(report.lambda_min_nz_AtA > 0.0) || report.m == 0) {
    throw Error(ErrorKind::MissingSpectrum, "conditioning report is incomplete");
  }
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorKind::ConfigMismatch, "delta in (0, 1]");
  const double wmin = weights.omega_min;
  const double wmax = weights.omega_max;
  const double lb = report.lambda_max_block;
  const double md = static_cast<double>(report.m);

  RatePrediction p;
  p.rate_basic = basic_rate(1.0, report.lambda_min_nz_AtA, report.frobenius_sq);
  const double alpha = constant_extrapolated_alpha(weights, lb, delta);
  p.rate_constant_stepsize = constant_stepsize_rate(alpha, weights, lb, report.lambda_min_nz_W);
  p.rate_adaptive = 1.0 - delta * (2.0 - delta) * wmin * report.lambda_min_nz_W / (wmax * lb);
  p.rate_paving =
      1.0 - report.lambda_min_nz_AtA / (6.0 * std::log(1.0 + md) * report.spectral_sq);
  if (report.lambda_min_AAt > 0.0) {
    const double su = std::sqrt(report.lambda_max_AAt);
    const double sl = std::sqrt(report.lambda_min_AAt);
    p.cheb_factor = (su - sl) / (su + sl);
  }
  p.speedup_vs_basic = static_cast<double>(tau) / lb;
  p.diversity_ok = report.spectral_sq < md / (6.0 * std::log(1.0 + md));
  p.optimistic = report.lambda_max_block_mode == LambdaBlockMode::MonteCarloEstimate;
  return p;
}

PavingQuality paving_quality(const LinearSystem& system, const Paving& paving) {
  if (!system.normalized() && !rows_are_normalized(system.matrix())) {
    throw Error(ErrorKind::NotNormalized, "paving quality needs unit rows");
  }
  const auto spec = paving_sampling(paving);
  PavingQuality q;
  q.lambda_max_block = block_lambda_max(system, spec).value;
  const double md = static_cast<double>(system.rows());
  q.bound = 6.0 * std::log(1.0 + md);
  q.bound_log2 = 6.0 * std::log2(1.0 + md);
  q.satisfied = q.lambda_max_block <= q.bound;
  q.satisfied_log2 = q.lambda_max_block <= q.bound_log2;
  return q;
}

}  // namespace kaczlab
