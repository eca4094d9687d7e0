#include "kaczlab/serialize.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "kaczlab/io.hpp"

namespace kaczlab {

namespace {

Json blocks_to_json(const std::vector<Block>& blocks) {
  Json arr = Json::array();
  for (const Block& b : blocks) {
    Json jb = Json::array();
    for (std::size_t i : b) jb.push_back(i + 1);
    arr.push_back(std::move(jb));
  }
  return arr;
}

std::vector<Block> blocks_from_json(const Json& arr) {
  if (!arr.is_array()) throw Error(ErrorKind::Parse, "blocks must be an array of arrays");
  std::vector<Block> blocks;
  for (const Json& jb : arr) {
    if (!jb.is_array()) throw Error(ErrorKind::Parse, "blocks must be an array of arrays");
    Block b;
    for (const Json& v : jb) {
      if (!v.is_number_integer() || v.get<long long>() < 1) {
        throw Error(ErrorKind::Parse, "block indices are positive 1-based integers");
      }
      b.push_back(v.get<std::size_t>() - 1);
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

template <class T>
T field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::Parse, std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
std::optional<T> optional_field(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return field<T>(j, key, T{});
}

Json real_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json weights_to_json(const WeightScheme& w) {
  if (w.kind == WeightKind::Explicit) return Json{{"explicit", w.values}};
  return std::string(weights_name(w));
}

WeightScheme weights_from_json(const Json& j) {
  if (j.is_string()) return parse_weights(j.get<std::string>());
  if (j.is_object() && j.contains("explicit")) {
    return WeightScheme::explicit_weights(field<Vector>(j, "explicit", {}));
  }
  throw Error(ErrorKind::Parse, "weights must be a name or {\"explicit\": [...]}");
}

}  // namespace

Json to_json(const Paving& p) {
  return Json{{"m", p.m}, {"ell", p.ell}, {"seed", p.seed}, {"blocks", blocks_to_json(p.blocks)}};
}

Paving paving_from_json(const Json& j) {
  Paving p;
  p.m = field<std::size_t>(j, "m", 0);
  p.ell = field<std::size_t>(j, "ell", 0);
  p.seed = field<std::uint64_t>(j, "seed", 0);
  if (!j.contains("blocks")) throw Error(ErrorKind::Parse, "paving needs 'blocks'");
  p.blocks = blocks_from_json(j.at("blocks"));
  if (p.ell == 0) p.ell = p.blocks.size();
  if (p.ell != p.blocks.size()) throw Error(ErrorKind::Parse, "ell != number of blocks");
  return p;
}

Json to_json(const ChebyshevSchedule& s) {
  return Json{{"singular", s.singular}, {"horizon", s.horizon()}, {"ell", s.ell}, {"u", s.u},
              {"kappa", s.kappa}, {"alphas", s.alphas}};
}

Json to_json(const ConditioningReport& r, bool include_W) {
  Json j{{"m", r.m},
         {"n", r.n},
         {"tau_min", r.tau_min},
         {"tau_max", r.tau_max},
         {"lambda_max_block", r.lambda_max_block},
         {"lambda_max_block_mode", std::string(to_string(r.lambda_max_block_mode))},
         {"lambda_max_block_samples", r.lambda_max_block_samples},
         {"lambda_min_nz_W", r.lambda_min_nz_W},
         {"lambda_max_W", r.lambda_max_W},
         {"spectral_sq", r.spectral_sq},
         {"frobenius_sq", r.frobenius_sq},
         {"lambda_min_AAt", r.lambda_min_AAt},
         {"lambda_max_AAt", r.lambda_max_AAt},
         {"lambda_min_nz_AtA", r.lambda_min_nz_AtA},
         {"rank", r.rank}};
  if (include_W) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < r.W.rows(); ++i) {
      rows.push_back(Vector(r.W.row(i).begin(), r.W.row(i).end()));
    }
    j["W"] = std::move(rows);
  }
  return j;
}

Json to_json(const RatePrediction& p) {
  return Json{{"rate_basic", p.rate_basic},
              {"rate_constant_stepsize", p.rate_constant_stepsize},
              {"rate_adaptive", p.rate_adaptive},
              {"rate_paving", p.rate_paving},
              {"cheb_factor", p.cheb_factor ? Json(*p.cheb_factor) : Json(nullptr)},
              {"speedup_vs_basic", p.speedup_vs_basic},
              {"diversity_ok", p.diversity_ok},
              {"optimistic", p.optimistic}};
}

Json to_json(const PavingQuality& q) {
  return Json{{"lambda_max_block", q.lambda_max_block},
              {"bound", q.bound},
              {"bound_log2", q.bound_log2},
              {"satisfied", q.satisfied},
              {"satisfied_log2", q.satisfied_log2}};
}

Json to_json(const ProblemRecipe& r) {
  return Json{{"recipe", to_string(r)}, {"seed", r.seed}};
}

Json to_json(const SamplingDescriptor& s) {
  Json j;
  switch (s.kind) {
    case SamplingKind::Uniform: j = {{"kind", "uniform"}, {"tau", s.tau}}; break;
    case SamplingKind::FullBatch: j = {{"kind", "fullbatch"}}; break;
    case SamplingKind::Paving:
      j = {{"kind", "paving"}, {"ell", s.ell}};
      if (s.paving_seed) j["seed"] = *s.paving_seed;
      break;
    case SamplingKind::Aligned: j = {{"kind", "aligned"}, {"block_size", s.block_size}}; break;
    case SamplingKind::Partition:
      j = {{"kind", "partition"}, {"blocks", blocks_to_json(s.blocks)}};
      if (s.probabilities == BlockProbabilities::Explicit) {
        j["probabilities"] = s.probs;
      } else {
        j["probabilities"] =
            s.probabilities == BlockProbabilities::Frobenius ? "frobenius" : "uniform";
      }
      break;
  }
  return j;
}

SamplingDescriptor sampling_from_json(const Json& j) {
  if (j.is_string()) return parse_sampling(j.get<std::string>());
  if (!j.is_object()) throw Error(ErrorKind::Parse, "sampling must be a string or an object");
  const std::string kind = field<std::string>(j, "kind", "uniform");
  SamplingDescriptor s;
  if (kind == "uniform") {
    s.kind = SamplingKind::Uniform;
    s.tau = field<std::size_t>(j, "tau", 1);
  } else if (kind == "fullbatch") {
    s.kind = SamplingKind::FullBatch;
  } else if (kind == "paving") {
    s.kind = SamplingKind::Paving;
    s.ell = field<std::size_t>(j, "ell", 0);
    s.paving_seed = optional_field<std::uint64_t>(j, "seed");
  } else if (kind == "aligned") {
    s.kind = SamplingKind::Aligned;
    s.block_size = field<std::size_t>(j, "block_size", 0);
  } else if (kind == "partition") {
    s.kind = SamplingKind::Partition;
    if (!j.contains("blocks")) throw Error(ErrorKind::Parse, "partition needs 'blocks'");
    s.blocks = blocks_from_json(j.at("blocks"));
    const Json probs = j.value("probabilities", Json("uniform"));
    if (probs.is_array()) {
      s.probabilities = BlockProbabilities::Explicit;
      s.probs = probs.get<Vector>();
    } else if (probs == "uniform") {
      s.probabilities = BlockProbabilities::Uniform;
    } else if (probs == "frobenius") {
      s.probabilities = BlockProbabilities::Frobenius;
    } else {
      throw Error(ErrorKind::Parse, "probabilities: uniform, frobenius or an array");
    }
  } else {
    throw Error(ErrorKind::Parse, "unknown sampling kind '" + kind + "'");
  }
  return s;
}

Json to_json(const StepsizeDescriptor& s) {
  Json j{{"kind", std::string(to_string(s.kind))}};
  switch (s.kind) {
    case StepsizeKind::Constant: j["alpha"] = s.alpha; break;
    case StepsizeKind::ConstantExtrapolated:
      j["delta"] = s.delta;
      if (s.lambda_max_block) j["lambda_max_block"] = *s.lambda_max_block;
      break;
    case StepsizeKind::Adaptive: j["delta"] = s.delta; break;
    case StepsizeKind::ChebyshevPD:
    case StepsizeKind::ChebyshevSingular:
      if (s.lambda_min) j["lambda_min"] = *s.lambda_min;
      if (s.lambda_max) j["lambda_max"] = *s.lambda_max;
      if (s.horizon) j["horizon"] = *s.horizon;
      if (!s.kappa.empty()) j["kappa"] = s.kappa;
      j["kappa_order"] = std::string(to_string(s.kappa_order));
      if (s.kappa_seed) j["kappa_seed"] = *s.kappa_seed;
      break;
  }
  return j;
}

StepsizeDescriptor stepsize_from_json(const Json& j) {
  StepsizeDescriptor s;
  if (j.is_string()) {
    s.kind = parse_stepsize_kind(j.get<std::string>());
    return s;
  }
  if (!j.is_object()) throw Error(ErrorKind::Parse, "stepsize must be a string or an object");
  s.kind = parse_stepsize_kind(field<std::string>(j, "kind", "constant"));
  s.alpha = field<double>(j, "alpha", 1.0);
  s.delta = field<double>(j, "delta", 1.0);
  s.lambda_max_block = optional_field<double>(j, "lambda_max_block");
  s.lambda_min = optional_field<double>(j, "lambda_min");
  s.lambda_max = optional_field<double>(j, "lambda_max");
  s.horizon = optional_field<std::size_t>(j, "horizon");
  s.kappa = field<std::vector<std::size_t>>(j, "kappa", {});
  s.kappa_order = parse_kappa_order(field<std::string>(j, "kappa_order", "identity"));
  s.kappa_seed = optional_field<std::uint64_t>(j, "kappa_seed");
  return s;
}

Json to_json(const RunDescriptor& d) {
  Json j;
  if (!d.name.empty()) j["name"] = d.name;
  j["method"] = std::string(to_string(d.method));
  j["sampling"] = to_json(d.sampling);
  j["weights"] = weights_to_json(d.weights);
  j["stepsize"] = to_json(d.stepsize);
  j["max_iters"] = d.max_iters;
  j["residual_tol"] = d.residual_tol ? Json(*d.residual_tol) : Json(nullptr);
  j["seed"] = d.seed;
  j["trace_level"] = std::string(to_string(d.trace_level));
  j["diagnostics"] = d.diagnostics;
  if (d.x0) j["x0"] = *d.x0;
  j["lambda_block_budget"] = d.lambda_block_budget;
  return j;
}

RunDescriptor run_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "config must be a JSON object");
  RunDescriptor d;
  d.name = field<std::string>(j, "name", "");
  d.method = parse_method(field<std::string>(j, "method", "rbk"));
  if (j.contains("sampling")) d.sampling = sampling_from_json(j.at("sampling"));
  if (j.contains("weights")) d.weights = weights_from_json(j.at("weights"));
  if (j.contains("stepsize")) d.stepsize = stepsize_from_json(j.at("stepsize"));
  d.max_iters = field<std::size_t>(j, "max_iters", d.max_iters);
  d.residual_tol = optional_field<double>(j, "residual_tol");
  d.seed = field<std::uint64_t>(j, "seed", 0);
  const std::string level = field<std::string>(j, "trace_level", "norms-only");
  if (level == "norms-only") {
    d.trace_level = TraceLevel::NormsOnly;
  } else if (level == "full-iterates") {
    d.trace_level = TraceLevel::FullIterates;
  } else {
    throw Error(ErrorKind::Parse, "trace_level: norms-only or full-iterates");
  }
  d.diagnostics = field<bool>(j, "diagnostics", true);
  d.x0 = optional_field<Vector>(j, "x0");
  d.lambda_block_budget = field<std::size_t>(j, "lambda_block_budget", d.lambda_block_budget);
  return d;
}

Json to_json(const SolverConfig& c) {
  Json j;
  j["method"] = std::string(to_string(c.method));
  if (const auto* u = c.sampling.as_uniform()) {
    j["sampling"] = {{"kind", "uniform"}, {"m", u->m}, {"tau", u->tau}};
  } else if (const auto* p = c.sampling.as_partition()) {
    j["sampling"] = {{"kind", "partition"},
                     {"m", p->m},
                     {"blocks", blocks_to_json(p->blocks)},
                     {"probabilities", p->probs}};
  }
  j["weights"] = weights_to_json(c.weights);
  j["stepsize"] = std::visit(
      [](const auto& p) -> Json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ClassicConstant>) {
          return {{"kind", "constant"}, {"alpha", p.alpha}};
        } else if constexpr (std::is_same_v<P, ExtrapolatedConstant>) {
          Json s{{"kind", "constant-extrapolated"}, {"delta", p.delta}};
          if (p.lambda_max_block) s["lambda_max_block"] = *p.lambda_max_block;
          return s;
        } else if constexpr (std::is_same_v<P, Adaptive>) {
          return {{"kind", "adaptive"}, {"delta", p.delta}};
        } else if constexpr (std::is_same_v<P, ChebyshevPD>) {
          Json s = to_json(p.schedule);
          s["kind"] = "chebyshev-pd";
          return s;
        } else {
          Json s = to_json(p.schedule);
          s["kind"] = "chebyshev-singular";
          return s;
        }
      },
      c.stepsize);
  j["max_iters"] = c.max_iters;
  j["residual_tol"] = c.residual_tol ? Json(*c.residual_tol) : Json(nullptr);
  j["seed"] = c.seed;
  j["trace_level"] = std::string(to_string(c.trace_level));
  j["diagnostics"] = c.diagnostics;
  if (c.x0) j["x0"] = *c.x0;
  return j;
}

Json to_json(const SolverTrace& t) {
  Json j;
  j["config"] = to_json(t.config);
  j["residual_tol"] = t.residual_tol;
  j["alpha_constant"] = t.alpha_constant ? Json(*t.alpha_constant) : Json(nullptr);
  j["status"] = std::string(to_string(t.status));
  j["iterations"] = t.iterations();
  j["skipped_updates"] = t.skipped_updates;
  j["final_iterate"] = t.final_iterate;
  Json events = Json::array();
  for (const IterationEvent& e : t.events) {
    Json ev{{"k", e.k}};
    Json block = Json::array();
    for (std::size_t i : e.block) block.push_back(i + 1);
    ev["block"] = std::move(block);
    ev["alpha"] = e.skipped ? Json("skip") : real_or_null(e.alpha);
    ev["L"] = real_or_null(e.L);
    ev["residual_norm"] = e.residual_norm;
    ev["dist_sq"] = real_or_null(e.dist_sq);
    if (e.iterate) ev["iterate"] = *e.iterate;
    events.push_back(std::move(ev));
  }
  j["events"] = std::move(events);
  return j;
}

void write_trace_csv(std::ostream& out, const SolverTrace& t) {
  out << "k,block_size,alpha,residual_norm,dist_sq\n";
  for (const IterationEvent& e : t.events) {
    out << e.k << ',' << e.block.size() << ',' << (e.skipped ? "skip" : format_real(e.alpha))
        << ',' << format_real(e.residual_norm) << ',' << format_real(e.dist_sq) << '\n';
  }
}

}  // namespace kaczlab
