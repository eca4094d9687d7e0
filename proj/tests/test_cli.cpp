#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kaczlab/commands.hpp"
#include "kaczlab/io.hpp"
#include "kaczlab/problems.hpp"
#include "kaczlab/serialize.hpp"

using namespace kaczlab;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace

TEST_CASE("solve happy path") {
  TempDir dir("kaczlab_cli_solve");
  const std::vector<std::string> base{"solve",      "--recipe",   "gaussian:50x20",
                                      "--method",   "rbk",        "--sampling",
                                      "uniform:4",  "--stepsize", "constant-extrapolated",
                                      "--delta",    "1"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };

  const Result capped = cli(with({"--max-iters", "500", "--out", dir / "trace.csv"}));
  CHECK(capped.code == 2);
  CHECK(capped.out.find("status max-iters") != std::string::npos);
  const auto rows = csv_rows(dir / "trace.csv");
  REQUIRE(rows.size() == 502);
  CHECK(rows[0] == std::vector<std::string>{"k", "block_size", "alpha", "residual_norm", "dist_sq"});
  CHECK(rows[1][2] == "nan");
  CHECK(rows[501][0] == "500");
  CHECK(rows[501][1] == "4");

  const Result done = cli(with({"--max-iters", "5000", "--out", dir / "trace2.csv", "--json",
                                dir / "trace.json"}));
  CHECK(done.code == 0);
  CHECK(done.out.find("status converged") != std::string::npos);
  const Json j = Json::parse(slurp(dir / "trace.json"));
  CHECK(j["status"] == "converged");
  CHECK(j["descriptor"]["stepsize"]["kind"] == "constant-extrapolated");
  CHECK(j["events"].size() == csv_rows(dir / "trace2.csv").size() - 1);
}

TEST_CASE("solve from files and config") {
  TempDir dir("kaczlab_cli_files");
  const LinearSystem s = generate_problem(parse_recipe("gaussian:12x4", 3));
  write_matrix_market(fs::path(dir / "a.mtx"), s.matrix());
  write_vector(fs::path(dir / "b.txt"), s.rhs());

  const Result ok = cli({"solve", "--matrix", dir / "a.mtx", "--rhs", dir / "b.txt",
                         "--max-iters", "20000"});
  CHECK(ok.code == 0);

  const Result missing = cli({"solve", "--matrix", dir / "a.mtx", "--rhs", dir / "nope.txt"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("Io") != std::string::npos);

  write_file(dir / "run.json",
             R"({"method":"basic","sampling":"uniform:1","stepsize":{"kind":"constant","alpha":1.5},)"
             R"("max_iters":3,"seed":4})");
  const Result cfg = cli({"solve", "--matrix", dir / "a.mtx", "--rhs", dir / "b.txt", "--config",
                          dir / "run.json", "--out", dir / "t.csv"});
  CHECK(cfg.code == 2);
  const auto rows = csv_rows(dir / "t.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[2][2] == "1.5");

  write_file(dir / "bad.json", "{not json");
  CHECK(cli({"solve", "--recipe", "gaussian:5x5", "--config", dir / "bad.json"}).code == 1);
  CHECK(cli({"solve", "--recipe", "gaussian:5x5", "--matrix", dir / "a.mtx"}).code == 1);
  CHECK(cli({"solve", "--recipe", "nonsense"}).code == 1);
  CHECK(cli({"solve", "--recipe", "gaussian:5x5", "--bogus-flag"}).code == 1);
  CHECK(cli({}).code == 1);
}

TEST_CASE("Chebyshev-PD on a rank-deficient recipe is refused") {
  const Result r = cli({"solve", "--recipe", "rankdef:30x20:10", "--sampling", "fullbatch",
                        "--stepsize", "chebyshev-pd", "--max-iters", "20"});
  CHECK(r.code == 1);
  CHECK(r.err.find("ConfigMismatch") != std::string::npos);

  const Result sing = cli({"solve", "--recipe", "rankdef:30x20:10", "--sampling", "fullbatch",
                           "--stepsize", "chebyshev-singular", "--kappa", "leja",
                           "--max-iters", "20", "--tol", "0"});
  CHECK(sing.code == 2);
  CHECK(cli({"solve", "--recipe", "gaussian:6x6", "--sampling", "fullbatch", "--stepsize",
             "chebyshev-pd", "--kappa", "sideways"})
            .code == 1);
}

TEST_CASE("stalled runs exit 3") {
  TempDir dir("kaczlab_cli_stall");
  write_file(dir / "a.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n");
  write_file(dir / "b.txt", "0\n1\n");
  write_file(dir / "run.json",
             R"({"sampling":{"kind":"partition","blocks":[[1],[2]],"probabilities":[1,0]},)"
             R"("stepsize":"adaptive","max_iters":500})");
  const Result r =
      cli({"solve", "--matrix", dir / "a.mtx", "--rhs", dir / "b.txt", "--config", dir / "run.json"});
  CHECK(r.code == 3);
  CHECK(r.out.find("status stalled") != std::string::npos);
}

TEST_CASE("analyze") {
  TempDir dir("kaczlab_cli_analyze");
  write_file(dir / "id.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n2 2 1\n");
  write_file(dir / "id.rhs", "1\n1\n");
  const Result r = cli({"analyze", "--matrix", dir / "id.mtx", "--rhs", dir / "id.rhs",
                        "--sampling", "uniform:1", "--json"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["rates"]["rate_basic"].get<double>() == doctest::Approx(0.5));
  CHECK(j["rates"]["rate_constant_stepsize"].get<double>() == doctest::Approx(0.5));
  CHECK(j["conditioning"]["lambda_max_block_mode"] == "exact-enumeration");

  const Result table = cli({"analyze", "--matrix", dir / "id.mtx", "--rhs", dir / "id.rhs"});
  CHECK(table.code == 0);
  CHECK(table.out.find("basic") != std::string::npos);
  CHECK(table.out.find("0.5") != std::string::npos);

  const Result pav = cli({"analyze", "--recipe", "gaussian:40x10", "--paving", "--json",
                          "--out", dir / "report.json"});
  REQUIRE(pav.code == 0);
  const Json pj = Json::parse(pav.out);
  CHECK(pj.contains("paving_quality"));
  CHECK(pj["paving_quality"]["satisfied"].is_boolean());
  CHECK(Json::parse(slurp(dir / "report.json")) == pj);
  const Result pav_table = cli({"analyze", "--recipe", "gaussian:40x10", "--paving"});
  CHECK(pav_table.out.find("satisfied") != std::string::npos);

  const Result mc = cli({"analyze", "--recipe", "gaussian:30x10", "--sampling", "uniform:15",
                         "--budget", "500"});
  REQUIRE(mc.code == 0);
  CHECK(mc.out.find("monte-carlo-estimate") != std::string::npos);
  CHECK(mc.out.find("optimistic") != std::string::npos);
  const Json mj = Json::parse(cli({"analyze", "--recipe", "gaussian:30x10", "--sampling",
                                   "uniform:15", "--budget", "500", "--json"})
                                  .out);
  CHECK(mj["conditioning"]["lambda_max_block_mode"] == "monte-carlo-estimate");
  CHECK(mj["rates"]["optimistic"] == true);
}

TEST_CASE("experiment") {
  TempDir dir("kaczlab_cli_experiment");
  write_file(dir / "plan.json", R"({
    "recipe": "orthoblocks:32x16:8", "seed": 3, "trials": 40, "report_tolerance": 1e-6,
    "configs": [
      {"name": "basic", "method": "basic", "sampling": "uniform:1", "max_iters": 1500},
      {"name": "rbk", "method": "rbk", "sampling": "aligned:8",
       "stepsize": {"kind": "constant-extrapolated", "delta": 1}, "max_iters": 1500}
    ]})");
  const Result r = cli({"experiment", dir / "plan.json", "--out-dir", dir / "out"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("rbk: violations 0") != std::string::npos);
  const Json summary = Json::parse(slurp(dir / "out/summary.json"));
  REQUIRE(summary["configs"].size() == 2);
  CHECK(summary["baseline"] == "basic");
  const Json& basic = summary["configs"][0];
  const Json& rbk = summary["configs"][1];
  CHECK(basic["theorem"] == "basic");
  CHECK(rbk["theorem"] == "constant-stepsize");
  CHECK(basic["bound_violations"] == 0);
  CHECK(rbk["bound_violations"] == 0);
  CHECK(rbk["iterations_to_tolerance"]["reached"] == 40);
  CHECK(rbk["speedup_vs_baseline"].get<double>() >= 2.0);
  CHECK(basic["speedup_vs_baseline"].get<double>() == 1.0);
  CHECK(rbk["predicted_speedup"].get<double>() == doctest::Approx(8.0));

  for (const char* name : {"basic", "rbk"}) {
    const auto rows = csv_rows(dir.path / "out" / (std::string(name) + ".csv"));
    REQUIRE(rows.size() == 1502);
    CHECK(rows[0] ==
          std::vector<std::string>{"k", "empirical_mean_dist_sq", "stderr", "theory_bound"});
    const double rate = summary["configs"][name == std::string("basic") ? 0 : 1]["rate"].get<double>();
    for (std::size_t k = 2; k < rows.size(); ++k) {
      const double prev = std::stod(rows[k - 1][3]);
      const double cur = std::stod(rows[k][3]);
      CHECK(std::abs(cur - rate * prev) <= 1e-12 * std::max(1e-300, prev));
    }
    CHECK(std::stod(rows[1][3]) == std::stod(rows[1][1]));
  }
}

TEST_CASE("experiment with one trial and a deterministic method") {
  TempDir dir("kaczlab_cli_experiment1");
  write_file(dir / "plan.json", R"({
    "recipe": "gaussian:10x4", "trials": 1,
    "configs": [
      {"name": "fb", "sampling": "fullbatch", "max_iters": 25},
      {"name": "proj", "method": "block-projection", "sampling": "aligned:5", "max_iters": 25}
    ]})");
  REQUIRE(cli({"experiment", dir / "plan.json", "--out-dir", dir / "out"}).code == 0);
  const auto rows = csv_rows(dir.path / "out/fb.csv");
  REQUIRE(rows.size() == 27);
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(std::stod(rows[k][2]) == 0.0);
  const auto proj = csv_rows(dir.path / "out/proj.csv");
  CHECK(proj[5][3] == "nan");
  const Json summary = Json::parse(slurp(dir / "out/summary.json"));
  CHECK(summary["configs"][1]["theorem"] == "none");
  CHECK(summary["configs"][1]["rate"].is_null());
  CHECK(summary["baseline"].is_null());

  write_file(dir / "bad.json", R"({"recipe": "gaussian:10x4", "trials": 0, "configs": [{}]})");
  CHECK(cli({"experiment", dir / "bad.json", "--out-dir", dir / "o2"}).code == 1);
  write_file(dir / "empty.json", R"({"recipe": "gaussian:10x4", "trials": 3, "configs": []})");
  CHECK(cli({"experiment", dir / "empty.json", "--out-dir", dir / "o3"}).code == 1);
}

TEST_CASE("reruns are byte-identical and KACZLAB_SEED overrides the seed") {
  TempDir dir("kaczlab_cli_repeat");
  const std::vector<std::string> args{"solve", "--recipe", "coherent:30x8:0.4", "--sampling",
                                      "uniform:3", "--stepsize", "adaptive", "--max-iters", "80",
                                      "--seed", "5"};
  auto run_to = [&](const std::string& file) {
    std::vector<std::string> a = args;
    a.insert(a.end(), {"--out", dir / file});
    CHECK(cli(a).code == 2);
    return slurp(dir.path / file);
  };
  const std::string first = run_to("a.csv");
  CHECK(run_to("b.csv") == first);

  ::setenv("KACZLAB_SEED", "6", 1);
  const std::string overridden = run_to("c.csv");
  ::unsetenv("KACZLAB_SEED");
  CHECK(overridden != first);

  // The override replaces the solver seed only; the recipe keeps --seed 5.
  std::vector<std::string> six = args;
  six.insert(six.end(), {"--out", dir / "d.csv"});
  six[10] = "6";
  cli(six);
  CHECK(slurp(dir.path / "d.csv") != overridden);

  ::setenv("KACZLAB_SEED", "twelve", 1);
  CHECK(cli(args).code == 1);
  ::unsetenv("KACZLAB_SEED");
}

TEST_CASE("paving command") {
  TempDir dir("kaczlab_cli_paving");
  const Result r = cli({"paving", "--m", "10", "--ell", "3", "--seed", "4"});
  REQUIRE(r.code == 0);
  const Paving p = paving_from_json(Json::parse(r.out));
  CHECK(p.blocks == build_random_paving(std::uint64_t{4}, 10, 3).blocks);

  REQUIRE(cli({"paving", "--recipe", "gaussian:200x50", "--seed", "2", "--out", dir / "p.json"})
              .code == 0);
  const Json j = Json::parse(slurp(dir / "p.json"));
  CHECK(j["ell"] == 9);
  CHECK(j.contains("quality"));
  CHECK(cli({"paving", "--m", "10"}).code == 1);
  CHECK(cli({"paving", "--m", "10", "--ell", "3", "--recipe", "gaussian:10x3"}).code == 1);
}

TEST_CASE("installed binary") {
  TempDir dir("kaczlab_cli_binary");
  const std::string exe = KACZLAB_CLI_PATH;
  const std::string cmd = "\"" + exe + "\" solve --recipe gaussian:20x5 --max-iters 10000 --out " +
                          (dir / "t.csv") + " > " + (dir / "log.txt") + " 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir.path / "t.csv"));
  const std::string bad = "\"" + exe + "\" solve --recipe gaussian:20x5 --rhs /nonexistent/b.txt " +
                          "--matrix /nonexistent/a.mtx > " + (dir / "log2.txt") + " 2>&1";
  CHECK(std::system(bad.c_str()) != 0);
  const std::string help = "\"" + exe + "\" --help > " + (dir / "help.txt");
  CHECK(std::system(help.c_str()) == 0);
  CHECK(slurp(dir.path / "help.txt").find("experiment") != std::string::npos);
}
