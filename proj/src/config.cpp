#include "kaczlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

namespace kaczlab {

namespace {

std::size_t parse_count(std::string_view s, std::string_view whole) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::Parse, "bad count in '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

SamplingDescriptor parse_sampling(std::string_view text) {
  SamplingDescriptor d;
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string_view arg =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (kind == "uniform") {
    d.kind = SamplingKind::Uniform;
    d.tau = arg.empty() ? 1 : parse_count(arg, text);
  } else if (kind == "fullbatch") {
    d.kind = SamplingKind::FullBatch;
  } else if (kind == "paving") {
    d.kind = SamplingKind::Paving;
    d.ell = arg.empty() ? 0 : parse_count(arg, text);
  } else if (kind == "aligned") {
    d.kind = SamplingKind::Aligned;
    d.block_size = parse_count(arg, text);
  } else {
    throw Error(ErrorKind::Parse, "unknown sampling '" + std::string(text) +
                                      "' (uniform:T, fullbatch, paving[:L], aligned:B)");
  }
  return d;
}

std::string to_string(const SamplingDescriptor& s) {
  switch (s.kind) {
    case SamplingKind::Uniform: return "uniform:" + std::to_string(s.tau);
    case SamplingKind::FullBatch: return "fullbatch";
    case SamplingKind::Paving: return s.ell ? "paving:" + std::to_string(s.ell) : "paving";
    case SamplingKind::Aligned: return "aligned:" + std::to_string(s.block_size);
    case SamplingKind::Partition: return "partition";
  }
  return "unknown";
}

std::string_view to_string(StepsizeKind k) noexcept {
  switch (k) {
    case StepsizeKind::Constant: return "constant";
    case StepsizeKind::ConstantExtrapolated: return "constant-extrapolated";
    case StepsizeKind::Adaptive: return "adaptive";
    case StepsizeKind::ChebyshevPD: return "chebyshev-pd";
    case StepsizeKind::ChebyshevSingular: return "chebyshev-singular";
  }
  return "unknown";
}

std::string_view to_string(KappaOrder k) noexcept {
  switch (k) {
    case KappaOrder::Identity: return "identity";
    case KappaOrder::Leja: return "leja";
    case KappaOrder::Random: return "random";
  }
  return "unknown";
}

KappaOrder parse_kappa_order(std::string_view text) {
  for (auto k : {KappaOrder::Identity, KappaOrder::Leja, KappaOrder::Random}) {
    if (text == to_string(k)) return k;
  }
  throw Error(ErrorKind::Parse, "unknown kappa order '" + std::string(text) +
                                    "' (identity, leja, random)");
}

StepsizeKind parse_stepsize_kind(std::string_view text) {
  for (auto k : {StepsizeKind::Constant, StepsizeKind::ConstantExtrapolated,
                 StepsizeKind::Adaptive, StepsizeKind::ChebyshevPD,
                 StepsizeKind::ChebyshevSingular}) {
    if (text == to_string(k)) return k;
  }
  throw Error(ErrorKind::Parse, "unknown stepsize '" + std::string(text) + "'");
}

Method parse_method(std::string_view text) {
  for (auto m : {Method::Basic, Method::RBK, Method::BlockProjection}) {
    if (text == to_string(m)) return m;
  }
  throw Error(ErrorKind::Parse, "unknown method '" + std::string(text) +
                                    "' (basic, rbk, block-projection)");
}

WeightScheme parse_weights(std::string_view text) {
  if (text == "uniform") return WeightScheme::uniform();
  if (text == "row-norm-sq") return WeightScheme::row_norm_sq();
  throw Error(ErrorKind::Parse, "unknown weights '" + std::string(text) +
                                    "' (uniform, row-norm-sq)");
}

std::string_view weights_name(const WeightScheme& w) noexcept {
  switch (w.kind) {
    case WeightKind::Uniform: return "uniform";
    case WeightKind::RowNormSq: return "row-norm-sq";
    case WeightKind::Explicit: return "explicit";
  }
  return "unknown";
}

SamplingSpec resolve_sampling(const SamplingDescriptor& d, const LinearSystem& system,
                              std::uint64_t run_seed) {
  const std::size_t m = system.rows();
  switch (d.kind) {
    case SamplingKind::Uniform: return SamplingSpec::uniform_subset(m, d.tau);
    case SamplingKind::FullBatch: return SamplingSpec::full_batch(m);
    case SamplingKind::Aligned:
      if (d.block_size == 0 || d.block_size > m) {
        throw Error(ErrorKind::BadSampling, "aligned block size must lie in [1, m]");
      }
      return SamplingSpec::partition_uniform(m, aligned_blocks(m, d.block_size));
    case SamplingKind::Paving: {
      std::size_t ell = d.ell;
      if (ell == 0) {
        ell = static_cast<std::size_t>(std::ceil(spectral_norm_sq(system.matrix())));
        ell = std::clamp<std::size_t>(ell, 1, m);
      }
      return paving_sampling(build_random_paving(d.paving_seed.value_or(run_seed), m, ell));
    }
    case SamplingKind::Partition:
      switch (d.probabilities) {
        case BlockProbabilities::Uniform: return SamplingSpec::partition_uniform(m, d.blocks);
        case BlockProbabilities::Frobenius:
          return SamplingSpec::partition_frobenius(system.matrix(), d.blocks);
        case BlockProbabilities::Explicit: return SamplingSpec::partition(m, d.blocks, d.probs);
      }
  }
  throw Error(ErrorKind::BadSampling, "unknown sampling kind");
}

SolverConfig resolve_config(const RunDescriptor& d, const LinearSystem& system) {
  SolverConfig c;
  c.method = d.method;
  c.sampling = resolve_sampling(d.sampling, system, d.seed);
  c.weights = d.weights;
  c.max_iters = d.max_iters;
  c.residual_tol = d.residual_tol;
  c.seed = d.seed;
  c.trace_level = d.trace_level;
  c.diagnostics = d.diagnostics;
  c.x0 = d.x0;
  c.lambda_block_budget = d.lambda_block_budget;

  const StepsizeDescriptor& s = d.stepsize;
  const std::size_t m = system.rows();
  const std::size_t horizon = s.horizon.value_or(d.max_iters);
  std::vector<std::size_t> kappa = s.kappa;
  if (kappa.empty() && s.kappa_order == KappaOrder::Random) {
    Rng rng = make_rng(s.kappa_seed.value_or(d.seed));
    kappa = random_permutation(rng, horizon);
  } else if (kappa.empty() && s.kappa_order == KappaOrder::Leja) {
    kappa = chebyshev_leja_kappa(horizon, s.kind == StepsizeKind::ChebyshevSingular);
  }
  switch (s.kind) {
    case StepsizeKind::Constant: c.stepsize = ClassicConstant{s.alpha}; break;
    case StepsizeKind::ConstantExtrapolated:
      c.stepsize = ExtrapolatedConstant{s.delta, s.lambda_max_block};
      break;
    case StepsizeKind::Adaptive: c.stepsize = Adaptive{s.delta}; break;
    case StepsizeKind::ChebyshevPD: {
      double lmin = s.lambda_min.value_or(0.0);
      double lmax = s.lambda_max.value_or(0.0);
      if (!s.lambda_min || !s.lambda_max) {
        const SpectralSummary g = gram_spectrum(system.matrix());
        if (g.rank_estimate < m) {
          throw Error(ErrorKind::ConfigMismatch,
                      "Chebyshev-PD needs lambda_min(A A^T) > 0 but rank(A) = " +
                          std::to_string(g.rank_estimate) + " < m = " + std::to_string(m));
        }
        if (!s.lambda_min) lmin = g.lambda_min_nz;
        if (!s.lambda_max) lmax = g.lambda_max;
      }
      c.stepsize = ChebyshevPD{chebyshev_schedule_pd(lmin, lmax, m, horizon, kappa)};
      break;
    }
    case StepsizeKind::ChebyshevSingular: {
      const double lmax = s.lambda_max.value_or(0.0) > 0.0 ? *s.lambda_max
                                                          : gram_spectrum(system.matrix()).lambda_max;
      c.stepsize = ChebyshevSingular{chebyshev_schedule_singular(lmax, m, horizon, kappa)};
      break;
    }
  }
  return c;
}

}  // namespace kaczlab
