#include "kaczlab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "kaczlab/io.hpp"
#include "kaczlab/problems.hpp"
#include "kaczlab/solver.hpp"

namespace kaczlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Squared distances below this fraction of the initial one are roundoff.
constexpr double kRoundoffFloor = 1e-28;

struct SystemSource {
  std::string recipe;
  std::string matrix;
  std::string rhs;
  bool normalize = false;
  std::uint64_t seed = 0;
};

struct LoadedSystem {
  LinearSystem system;
  Json description;
};

LoadedSystem load_system(const SystemSource& src) {
  if (!src.recipe.empty()) {
    if (!src.matrix.empty() || !src.rhs.empty()) {
      throw Error(ErrorKind::ConfigMismatch, "give either a recipe or matrix/rhs files");
    }
    const ProblemRecipe r = parse_recipe(src.recipe, src.seed);
    LinearSystem sys = generate_problem(r);
    Json d = to_json(r);
    d["m"] = sys.rows();
    d["n"] = sys.cols();
    return {std::move(sys), std::move(d)};
  }
  if (src.matrix.empty() || src.rhs.empty()) {
    throw Error(ErrorKind::ConfigMismatch, "need --recipe or both --matrix and --rhs");
  }
  DenseMatrix a = read_matrix_market(std::filesystem::path(src.matrix));
  Vector b = read_vector(std::filesystem::path(src.rhs));
  LinearSystem sys(std::move(a), std::move(b));
  if (src.normalize) sys = normalize_rows(sys).first;
  Json d{{"matrix", src.matrix}, {"rhs", src.rhs}, {"normalized", sys.normalized()},
         {"m", sys.rows()}, {"n", sys.cols()}};
  return {std::move(sys), std::move(d)};
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("KACZLAB_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used, 0);
    if (s[used] != '\0') throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, std::string("KACZLAB_SEED is not an integer: ") + s);
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << text;
}

void add_system_options(CLI::App* cmd, SystemSource& src) {
  cmd->add_option("--recipe", src.recipe,
                  "Generated system: gaussian:MxN, rankdef:MxN:rank, coherent:MxN:c, "
                  "orthoblocks:MxN:block");
  cmd->add_option("--matrix", src.matrix, "MatrixMarket file with A");
  cmd->add_option("--rhs", src.rhs, "Right-hand side b, one value per line");
  cmd->add_flag("--normalize", src.normalize, "Rescale the rows of a loaded system to unit norm");
  cmd->add_option("--seed", src.seed, "Seed for the recipe and the solver (default 0)");
}

double median_or_nan(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
  SystemSource src;
  std::string config_path;
  std::string method = "rbk";
  std::string sampling = "uniform:1";
  std::string weights = "uniform";
  std::string stepsize = "constant";
  double alpha = 1.0;
  double delta = 1.0;
  std::string kappa = "identity";
  std::size_t max_iters = 1000;
  std::optional<double> tol;
  std::string out_csv;
  std::string out_json;
  bool full_iterates = false;
};

int cmd_solve(const SolveArgs& args, const CLI::App& cmd, std::ostream& out) {
  const LoadedSystem loaded = load_system(args.src);
  RunDescriptor d;
  if (!args.config_path.empty()) d = run_from_json(read_json_file(args.config_path));
  if (args.config_path.empty() || cmd.count("--method")) d.method = parse_method(args.method);
  if (args.config_path.empty() || cmd.count("--sampling")) d.sampling = parse_sampling(args.sampling);
  if (args.config_path.empty() || cmd.count("--weights")) d.weights = parse_weights(args.weights);
  if (args.config_path.empty() || cmd.count("--stepsize")) {
    d.stepsize.kind = parse_stepsize_kind(args.stepsize);
  }
  if (args.config_path.empty() || cmd.count("--alpha")) d.stepsize.alpha = args.alpha;
  if (args.config_path.empty() || cmd.count("--delta")) d.stepsize.delta = args.delta;
  if (args.config_path.empty() || cmd.count("--kappa")) {
    d.stepsize.kappa_order = parse_kappa_order(args.kappa);
  }
  if (args.config_path.empty() || cmd.count("--max-iters")) d.max_iters = args.max_iters;
  if (args.config_path.empty() || cmd.count("--seed")) d.seed = args.src.seed;
  if (args.tol) d.residual_tol = args.tol;
  if (args.full_iterates) d.trace_level = TraceLevel::FullIterates;
  if (const auto s = env_seed()) d.seed = *s;

  const SolverConfig config = resolve_config(d, loaded.system);
  const SolverTrace trace = run_solver(config, loaded.system);

  if (!args.out_csv.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, trace);
    write_text(args.out_csv, csv.str());
  }
  if (!args.out_json.empty()) {
    Json j = to_json(trace);
    j["system"] = loaded.description;
    j["descriptor"] = to_json(d);
    write_text(args.out_json, j.dump(2) + "\n");
  }
  out << "status " << to_string(trace.status) << ", iterations " << trace.iterations()
      << ", residual " << format_real(trace.events.back().residual_norm) << '\n';
  switch (trace.status) {
    case TerminalStatus::Converged: return 0;
    case TerminalStatus::MaxIters: return 2;
    case TerminalStatus::Stalled: return 3;
  }
  return 1;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  SystemSource src;
  std::string sampling = "uniform:1";
  std::string weights = "uniform";
  double delta = 1.0;
  std::size_t budget = 20000;
  bool paving = false;
  std::size_t ell = 0;
  bool json = false;
  std::string out_path;
};

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out) {
  const LoadedSystem loaded = load_system(args.src);
  const LinearSystem& sys = loaded.system;
  std::uint64_t seed = args.src.seed;
  if (const auto s = env_seed()) seed = *s;
  const SamplingSpec spec = resolve_sampling(parse_sampling(args.sampling), sys, seed);
  const WeightScheme weights = parse_weights(args.weights);

  const ConditioningReport report = conditioning_report(sys, spec, args.budget, seed);
  const WeightBounds wb = weight_bounds(weights, row_norms_sq(sys.matrix()), spec);
  const RatePrediction rates = predict_rates(report, wb, args.delta, spec.max_block_size());

  Json j;
  j["system"] = loaded.description;
  j["sampling"] = args.sampling;
  j["weights"] = args.weights;
  j["delta"] = args.delta;
  j["omega_min"] = wb.omega_min;
  j["omega_max"] = wb.omega_max;
  j["conditioning"] = to_json(report);
  j["rates"] = to_json(rates);
  std::optional<Paving> paving;
  std::optional<PavingQuality> quality;
  if (args.paving) {
    std::size_t ell = args.ell;
    if (ell == 0) {
      ell = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(report.spectral_sq)), 1,
                                    sys.rows());
    }
    paving = build_random_paving(seed, sys.rows(), ell);
    quality = paving_quality(sys, *paving);
    j["paving"] = to_json(*paving);
    j["paving_quality"] = to_json(*quality);
  }
  if (!args.out_path.empty()) write_text(args.out_path, j.dump(2) + "\n");

  if (args.json) {
    out << j.dump(2) << '\n';
    return 0;
  }
  auto row = [&](const std::string& name, const std::string& value) {
    out << "  " << std::left << std::setw(26) << name << value << '\n';
  };
  auto num = [](double v) { return format_real(v); };
  out << "system " << sys.rows() << " x " << sys.cols() << ", sampling " << args.sampling
      << ", weights " << args.weights << ", delta " << num(args.delta) << '\n';
  out << "conditioning\n";
  std::string mode(to_string(report.lambda_max_block_mode));
  if (report.lambda_max_block_mode == LambdaBlockMode::MonteCarloEstimate) {
    mode += " (" + std::to_string(report.lambda_max_block_samples) +
            " samples; lower bound, rates are optimistic)";
  }
  row("lambda_max_block", num(report.lambda_max_block) + "  [" + mode + "]");
  row("lambda_min_nz(W)", num(report.lambda_min_nz_W));
  row("lambda_max(W)", num(report.lambda_max_W));
  row("|A|^2", num(report.spectral_sq));
  row("|A|_F^2", num(report.frobenius_sq));
  row("lambda_min(AA^T)", num(report.lambda_min_AAt));
  row("lambda_max(AA^T)", num(report.lambda_max_AAt));
  row("lambda_min_nz(A^T A)", num(report.lambda_min_nz_AtA));
  row("rank", std::to_string(report.rank));
  out << "rates (per iteration)\n";
  row("basic", num(rates.rate_basic));
  row("constant stepsize", num(rates.rate_constant_stepsize));
  row("adaptive", num(rates.rate_adaptive));
  row("paving", num(rates.rate_paving));
  row("chebyshev factor", rates.cheb_factor ? num(*rates.cheb_factor) : "n/a (lambda_min = 0)");
  row("speedup vs basic", num(rates.speedup_vs_basic));
  row("row diversity", rates.diversity_ok ? "yes" : "no");
  if (rates.optimistic) row("note", "optimistic: lambda_max_block was sampled");
  if (quality) {
    out << "paving (ell = " << paving->ell << ")\n";
    row("lambda_max_block", num(quality->lambda_max_block));
    row("bound 6 ln(1+m)", num(quality->bound) + (quality->satisfied ? "  satisfied" : "  violated"));
    row("bound 6 log2(1+m)",
        num(quality->bound_log2) + (quality->satisfied_log2 ? "  satisfied" : "  violated"));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// paving

struct PavingArgs {
  SystemSource src;
  std::size_t m = 0;
  std::size_t ell = 0;
  std::string out_path;
};

int cmd_paving(const PavingArgs& args, std::ostream& out) {
  std::uint64_t seed = args.src.seed;
  if (const auto s = env_seed()) seed = *s;
  Json j;
  if (args.m > 0) {
    if (!args.src.recipe.empty() || !args.src.matrix.empty()) {
      throw Error(ErrorKind::ConfigMismatch, "give either --m or a system");
    }
    if (args.ell == 0) throw Error(ErrorKind::BadBlockCount, "--ell is required with --m");
    j = to_json(build_random_paving(seed, args.m, args.ell));
  } else {
    const LoadedSystem loaded = load_system(args.src);
    std::size_t ell = args.ell;
    if (ell == 0) {
      ell = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::ceil(spectral_norm_sq(loaded.system.matrix()))), 1,
          loaded.system.rows());
    }
    const Paving p = build_random_paving(seed, loaded.system.rows(), ell);
    j = to_json(p);
    if (loaded.system.normalized() || rows_are_normalized(loaded.system.matrix())) {
      j["quality"] = to_json(paving_quality(loaded.system, p));
    }
  }
  const std::string text = j.dump(2) + "\n";
  if (args.out_path.empty()) {
    out << text;
  } else {
    write_text(args.out_path, text);
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// experiment

TheoryFactor theory_factor(const SolverConfig& config, const LinearSystem& system) {
  TheoryFactor t;
  t.theorem = "none";
  const ConditioningReport report =
      conditioning_report(system, config.sampling, config.lambda_block_budget, config.seed);
  t.lambda_block = {report.lambda_max_block, report.lambda_max_block_mode,
                    report.lambda_max_block_samples};
  if (config.method == Method::BlockProjection) return t;
  const WeightBounds wb = config.method == Method::Basic
                              ? WeightBounds{1.0, 1.0}
                              : weight_bounds(config.weights, row_norms_sq(system.matrix()),
                                              config.sampling);
  const double lnz = report.lambda_min_nz_W;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ClassicConstant>) {
          t.alpha = p.alpha;
        } else if constexpr (std::is_same_v<P, ExtrapolatedConstant>) {
          t.alpha = constant_extrapolated_alpha(
              wb, p.lambda_max_block.value_or(report.lambda_max_block), p.delta);
        } else if constexpr (std::is_same_v<P, Adaptive>) {
          t.theorem = "adaptive";
          t.factor = 1.0 - p.delta * (2.0 - p.delta) * wb.omega_min * lnz /
                               (wb.omega_max * report.lambda_max_block);
        }
      },
      config.stepsize);
  if (t.alpha) {
    const double lb = config.method == Method::Basic ? 1.0 : report.lambda_max_block;
    t.theorem = config.method == Method::Basic ? "basic" : "constant-stepsize";
    t.factor = constant_stepsize_rate(*t.alpha, wb, lb, lnz);
  }
  if (t.factor) t.factor = std::clamp(*t.factor, 0.0, 1.0);
  return t;
}

Json run_experiment(const Json& plan, const std::filesystem::path& out_dir) {
  if (!plan.is_object()) throw Error(ErrorKind::Parse, "plan must be a JSON object");
  SystemSource src;
  src.recipe = plan.value("recipe", std::string());
  src.matrix = plan.value("matrix", std::string());
  src.rhs = plan.value("rhs", std::string());
  src.normalize = plan.value("normalize", false);
  src.seed = plan.value("seed", std::uint64_t{0});
  const std::size_t trials = plan.value("trials", std::size_t{0});
  if (trials == 0) throw Error(ErrorKind::ConfigMismatch, "plan needs trials >= 1");
  const double report_tol = plan.value("report_tolerance", 1e-6);
  if (!plan.contains("configs") || !plan.at("configs").is_array() || plan.at("configs").empty()) {
    throw Error(ErrorKind::ConfigMismatch, "plan needs a nonempty 'configs' array");
  }
  const std::optional<std::uint64_t> seed_override = env_seed();

  const LoadedSystem loaded = load_system(src);
  const LinearSystem& sys = loaded.system;
  std::filesystem::create_directories(out_dir);

  Json summary;
  summary["system"] = loaded.description;
  summary["trials"] = trials;
  summary["report_tolerance"] = report_tol;
  Json results = Json::array();
  std::optional<double> baseline_median;
  std::string baseline_name;

  std::size_t index = 0;
  for (const Json& jc : plan.at("configs")) {
    RunDescriptor d = run_from_json(jc);
    if (d.name.empty()) d.name = "config" + std::to_string(index);
    if (seed_override) d.seed = *seed_override;
    if (!d.residual_tol) d.residual_tol = 0.0;
    ++index;
    const SolverConfig config = resolve_config(d, sys);
    const TheoryFactor theory = theory_factor(config, sys);
    const MonteCarloSummary mc = run_monte_carlo(config, sys, trials, report_tol);

    const std::filesystem::path csv_path = out_dir / (d.name + ".csv");
    std::ostringstream csv;
    csv << "k,empirical_mean_dist_sq,stderr,theory_bound\n";
    double bound = mc.mean_dist_sq[0];
    std::size_t violations = 0;
    for (std::size_t k = 0; k <= mc.iterations; ++k) {
      if (k > 0 && theory.factor) bound *= *theory.factor;
      const double shown = theory.factor ? bound : kNaN;
      if (theory.factor && bound > kRoundoffFloor * mc.mean_dist_sq[0] &&
          mc.mean_dist_sq[k] - 3.0 * mc.stderr_dist_sq[k] > bound)
        ++violations;
      csv << k << ',' << format_real(mc.mean_dist_sq[k]) << ',' << format_real(mc.stderr_dist_sq[k])
          << ',' << format_real(shown) << '\n';
    }
    write_text(csv_path, csv.str());

    std::vector<double> hits;
    Json per_trial = Json::array();
    for (const auto& h : mc.iterations_to_tolerance) {
      per_trial.push_back(h ? Json(*h) : Json(nullptr));
      hits.push_back(h ? static_cast<double>(*h) : std::numeric_limits<double>::infinity());
    }
    const double med = median_or_nan(hits);
    const std::size_t reached = static_cast<std::size_t>(
        std::count_if(mc.iterations_to_tolerance.begin(), mc.iterations_to_tolerance.end(),
                      [](const auto& h) { return h.has_value(); }));

    Json r;
    r["name"] = d.name;
    r["config"] = to_json(d);
    r["csv"] = csv_path.string();
    r["theorem"] = theory.theorem;
    r["rate"] = theory.factor ? Json(*theory.factor) : Json(nullptr);
    r["alpha"] = theory.alpha ? Json(*theory.alpha) : Json(nullptr);
    r["lambda_max_block"] = theory.lambda_block.value;
    r["lambda_max_block_mode"] = std::string(to_string(theory.lambda_block.mode));
    r["predicted_speedup"] =
        static_cast<double>(config.sampling.max_block_size()) / theory.lambda_block.value;
    r["bound_violations"] = violations;
    r["converged_trials"] = mc.converged;
    r["stalled_trials"] = mc.stalled;
    r["iterations_to_tolerance"] = {{"median", std::isfinite(med) ? Json(med) : Json(nullptr)},
                                    {"reached", reached},
                                    {"per_trial", per_trial}};
    if (!baseline_median && d.method == Method::Basic && std::isfinite(med)) {
      baseline_median = med;
      baseline_name = d.name;
    }
    results.push_back(std::move(r));
  }

  for (Json& r : results) {
    const Json& med = r["iterations_to_tolerance"]["median"];
    r["speedup_vs_baseline"] = baseline_median && med.is_number() && med.get<double>() > 0.0
                                   ? Json(*baseline_median / med.get<double>())
                                   : Json(nullptr);
  }
  summary["baseline"] = baseline_name.empty() ? Json(nullptr) : Json(baseline_name);
  summary["configs"] = std::move(results);
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized block Kaczmarz solver and analysis toolkit", "kaczlab"};
  app.require_subcommand(1);

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Run one solver configuration");
  add_system_options(solve_cmd, solve.src);
  solve_cmd->add_option("--config", solve.config_path, "Run description as JSON");
  solve_cmd->add_option("--method", solve.method, "basic | rbk | block-projection")
      ->capture_default_str();
  solve_cmd->add_option("--sampling", solve.sampling,
                        "uniform:T | fullbatch | paving[:L] | aligned:B")
      ->capture_default_str();
  solve_cmd->add_option("--weights", solve.weights, "uniform | row-norm-sq")->capture_default_str();
  solve_cmd
      ->add_option("--stepsize", solve.stepsize,
                   "constant | constant-extrapolated | adaptive | chebyshev-pd | "
                   "chebyshev-singular")
      ->capture_default_str();
  solve_cmd->add_option("--alpha", solve.alpha, "Stepsize for 'constant'")->capture_default_str();
  solve_cmd->add_option("--delta", solve.delta, "delta in (0, 1]")->capture_default_str();
  solve_cmd->add_option("--kappa", solve.kappa, "Chebyshev root order: identity | leja | random")
      ->capture_default_str();
  solve_cmd->add_option("--max-iters", solve.max_iters, "Iteration budget (Chebyshev horizon)")
      ->capture_default_str();
  solve_cmd->add_option("--tol", solve.tol, "Residual tolerance (default 1e-8 (1 + |b|))");
  solve_cmd->add_option("--out", solve.out_csv, "Trace CSV path");
  solve_cmd->add_option("--json", solve.out_json, "Trace JSON path");
  solve_cmd->add_flag("--full-iterates", solve.full_iterates, "Store every iterate in the trace");

  AnalyzeArgs analyze;
  CLI::App* analyze_cmd =
      app.add_subcommand("analyze", "Conditioning report and predicted rates");
  add_system_options(analyze_cmd, analyze.src);
  analyze_cmd->add_option("--sampling", analyze.sampling, "uniform:T | fullbatch | paving[:L] | aligned:B")
      ->capture_default_str();
  analyze_cmd->add_option("--weights", analyze.weights, "uniform | row-norm-sq")
      ->capture_default_str();
  analyze_cmd->add_option("--delta", analyze.delta, "delta in (0, 1]")->capture_default_str();
  analyze_cmd->add_option("--budget", analyze.budget,
                          "Sampled supports when C(m, tau) exceeds 1e5")
      ->capture_default_str();
  analyze_cmd->add_flag("--paving", analyze.paving, "Also build a random paving and judge it");
  analyze_cmd->add_option("--ell", analyze.ell, "Paving block count (default ceil(|A|^2))");
  analyze_cmd->add_flag("--json", analyze.json, "Print JSON instead of a table");
  analyze_cmd->add_option("--out", analyze.out_path, "Also write the JSON report here");

  std::string plan_path;
  std::string out_dir = "experiment-out";
  CLI::App* exp_cmd =
      app.add_subcommand("experiment", "Monte-Carlo comparison of configurations against theory");
  exp_cmd->add_option("plan", plan_path, "Experiment plan JSON")->required();
  exp_cmd->add_option("--out-dir", out_dir, "Directory for the CSVs and summary.json")
      ->capture_default_str();

  PavingArgs pav;
  CLI::App* pav_cmd = app.add_subcommand("paving", "Emit a random row paving as JSON");
  add_system_options(pav_cmd, pav.src);
  pav_cmd->add_option("--m", pav.m, "Number of rows when no system is given");
  pav_cmd->add_option("--ell", pav.ell, "Number of blocks (default ceil(|A|^2))");
  pav_cmd->add_option("--out", pav.out_path, "Output path (default stdout)");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("kaczlab");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve, *solve_cmd, out);
    if (*analyze_cmd) return cmd_analyze(analyze, out);
    if (*exp_cmd) {
      const Json summary = run_experiment(read_json_file(plan_path), out_dir);
      for (const Json& r : summary["configs"]) {
        out << r["name"].get<std::string>() << ": violations " << r["bound_violations"]
            << ", median iterations " << r["iterations_to_tolerance"]["median"]
            << ", speedup " << r["speedup_vs_baseline"] << '\n';
      }
      return 0;
    }
    if (*pav_cmd) return cmd_paving(pav, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace kaczlab
