#include <doctest.h>

#include <sstream>

#include "kaczlab/problems.hpp"
#include "kaczlab/serialize.hpp"

using namespace kaczlab;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Io;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("paving JSON is 1-based and round-trips") {
  const Paving p = build_random_paving(std::uint64_t{31}, 9, 3);
  const Json j = to_json(p);
  std::size_t smallest = 100;
  for (const Json& b : j["blocks"])
    for (const Json& v : b) smallest = std::min(smallest, v.get<std::size_t>());
  CHECK(smallest == 1);
  const Paving q = paving_from_json(Json::parse(j.dump()));
  CHECK(q.blocks == p.blocks);
  CHECK(q.m == 9);
  CHECK(q.ell == 3);
  CHECK(q.seed == 31);

  CHECK(kind_of([] { paving_from_json(Json::parse(R"({"m":2,"blocks":[[0,1]]})")); }) ==
        ErrorKind::Parse);
  CHECK(kind_of([] { paving_from_json(Json::parse(R"({"m":2,"ell":3,"blocks":[[1],[2]]})")); }) ==
        ErrorKind::Parse);
  CHECK(kind_of([] { paving_from_json(Json::parse(R"({"m":2})")); }) == ErrorKind::Parse);
}

TEST_CASE("sampling descriptors round-trip") {
  std::vector<SamplingDescriptor> all;
  all.push_back(parse_sampling("uniform:4"));
  all.push_back(parse_sampling("fullbatch"));
  all.push_back(parse_sampling("paving:3"));
  all.push_back(parse_sampling("aligned:5"));
  SamplingDescriptor part;
  part.kind = SamplingKind::Partition;
  part.blocks = {{0, 2}, {1}};
  part.probabilities = BlockProbabilities::Explicit;
  part.probs = {0.25, 0.75};
  all.push_back(part);
  SamplingDescriptor frob = part;
  frob.probabilities = BlockProbabilities::Frobenius;
  frob.probs.clear();
  all.push_back(frob);
  SamplingDescriptor seeded = parse_sampling("paving");
  seeded.paving_seed = 77;
  all.push_back(seeded);

  for (const SamplingDescriptor& s : all) {
    const SamplingDescriptor r = sampling_from_json(Json::parse(to_json(s).dump()));
    CHECK(r.kind == s.kind);
    CHECK(r.tau == s.tau);
    CHECK(r.ell == s.ell);
    CHECK(r.block_size == s.block_size);
    CHECK(r.paving_seed == s.paving_seed);
    CHECK(r.blocks == s.blocks);
    CHECK(r.probabilities == s.probabilities);
    CHECK(r.probs == s.probs);
  }
  CHECK(to_json(part)["blocks"] == Json::parse("[[1,3],[2]]"));
  CHECK(sampling_from_json(Json("uniform:2")).tau == 2);
  CHECK(kind_of([] { sampling_from_json(Json::parse(R"({"kind":"stratified"})")); }) ==
        ErrorKind::Parse);
  CHECK(kind_of([] { sampling_from_json(Json::parse(R"({"kind":"partition"})")); }) ==
        ErrorKind::Parse);
}

TEST_CASE("stepsize descriptors round-trip") {
  StepsizeDescriptor cheb;
  cheb.kind = StepsizeKind::ChebyshevSingular;
  cheb.lambda_max = 2.5;
  cheb.horizon = 12;
  cheb.kappa_order = KappaOrder::Leja;
  StepsizeDescriptor rnd = cheb;
  rnd.kind = StepsizeKind::ChebyshevPD;
  rnd.lambda_min = 0.1;
  rnd.kappa_order = KappaOrder::Random;
  rnd.kappa_seed = 5;
  StepsizeDescriptor expl = rnd;
  expl.kappa = {2, 0, 1};
  StepsizeDescriptor ext;
  ext.kind = StepsizeKind::ConstantExtrapolated;
  ext.delta = 0.5;
  ext.lambda_max_block = 1.25;
  StepsizeDescriptor con;
  con.alpha = 1.7;
  StepsizeDescriptor ada;
  ada.kind = StepsizeKind::Adaptive;
  ada.delta = 0.25;

  for (const StepsizeDescriptor& s : {cheb, rnd, expl, ext, con, ada}) {
    const StepsizeDescriptor r = stepsize_from_json(Json::parse(to_json(s).dump()));
    CHECK(r.kind == s.kind);
    CHECK(r.lambda_max_block == s.lambda_max_block);
    CHECK(r.lambda_min == s.lambda_min);
    CHECK(r.lambda_max == s.lambda_max);
    CHECK(r.horizon == s.horizon);
    CHECK(r.kappa == s.kappa);
    CHECK(r.kappa_seed == s.kappa_seed);
    if (s.kind == StepsizeKind::Constant) CHECK(r.alpha == s.alpha);
    if (s.kind != StepsizeKind::Constant) CHECK(r.delta == s.delta);
    if (s.kind == StepsizeKind::ChebyshevPD || s.kind == StepsizeKind::ChebyshevSingular)
      CHECK(r.kappa_order == s.kappa_order);
  }
  CHECK(to_json(cheb)["kappa_order"] == "leja");
  CHECK(stepsize_from_json(Json::parse(R"({"kind":"chebyshev-pd"})")).kappa_order ==
        KappaOrder::Identity);
  CHECK(kind_of([] { stepsize_from_json(Json::parse(R"({"kind":"chebyshev-pd","kappa_order":"spiral"})")); }) ==
        ErrorKind::Parse);
  CHECK(kind_of([] { stepsize_from_json(Json::parse(R"({"kind":"newton"})")); }) == ErrorKind::Parse);
  CHECK(kind_of([] { stepsize_from_json(Json::parse(R"({"kind":"constant","alpha":"big"})")); }) ==
        ErrorKind::Parse);
}

TEST_CASE("run descriptors round-trip") {
  RunDescriptor d;
  d.name = "demo";
  d.method = Method::BlockProjection;
  d.sampling = parse_sampling("aligned:4");
  d.weights = WeightScheme::row_norm_sq();
  d.stepsize.kind = StepsizeKind::Adaptive;
  d.stepsize.delta = 0.5;
  d.max_iters = 77;
  d.residual_tol = 1e-9;
  d.seed = 123;
  d.trace_level = TraceLevel::FullIterates;
  d.diagnostics = false;
  d.x0 = Vector{1, 2, 3};
  d.lambda_block_budget = 500;
  const RunDescriptor r = run_from_json(Json::parse(to_json(d).dump()));
  CHECK(r.name == d.name);
  CHECK(r.method == d.method);
  CHECK(r.sampling.kind == SamplingKind::Aligned);
  CHECK(r.sampling.block_size == 4);
  CHECK(r.weights.kind == WeightKind::RowNormSq);
  CHECK(r.stepsize.kind == StepsizeKind::Adaptive);
  CHECK(r.stepsize.delta == 0.5);
  CHECK(r.max_iters == 77);
  CHECK(r.residual_tol == 1e-9);
  CHECK(r.seed == 123);
  CHECK(r.trace_level == TraceLevel::FullIterates);
  CHECK_FALSE(r.diagnostics);
  CHECK(r.x0 == d.x0);
  CHECK(r.lambda_block_budget == 500);

  RunDescriptor e;
  e.weights = WeightScheme::explicit_weights({1, 2, 3});
  CHECK(run_from_json(to_json(e)).weights.values == Vector{1, 2, 3});

  const RunDescriptor defaults = run_from_json(Json::object());
  CHECK(defaults.method == Method::RBK);
  CHECK(defaults.max_iters == 1000);
  CHECK_FALSE(defaults.residual_tol.has_value());
  CHECK(kind_of([] { run_from_json(Json::array()); }) == ErrorKind::Parse);
  CHECK(kind_of([] { run_from_json(Json::parse(R"({"trace_level":"verbose"})")); }) ==
        ErrorKind::Parse);
  CHECK(kind_of([] { run_from_json(Json::parse(R"({"max_iters":"ten"})")); }) == ErrorKind::Parse);
  CHECK(kind_of([] { run_from_json(Json::parse(R"({"weights":17})")); }) == ErrorKind::Parse);
}

TEST_CASE("trace CSV") {
  const LinearSystem s(DenseMatrix::identity(2), {0, 1});
  SolverConfig c;
  c.sampling = SamplingSpec::partition(2, {{0}, {1}}, {1.0, 0.0});
  c.stepsize = Adaptive{1.0};
  c.max_iters = 3;
  const SolverTrace t = run_solver(c, s);
  std::ostringstream out;
  write_trace_csv(out, t);
  const auto rows = lines(out.str());
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "k,block_size,alpha,residual_norm,dist_sq");
  CHECK(rows[1] == "0,0,nan,1,1");
  CHECK(rows[2] == "1,1,skip,1,1");

  c.stepsize = ClassicConstant{0.5};
  c.sampling = SamplingSpec::partition(2, {{0}, {1}}, {0.0, 1.0});
  std::ostringstream out2;
  write_trace_csv(out2, run_solver(c, s));
  const auto rows2 = lines(out2.str());
  CHECK(rows2[1] == "0,0,nan,1,1");
  CHECK(rows2[2] == "1,1,0.5,0.5,0.25");
}

TEST_CASE("trace JSON") {
  const LinearSystem s = generate_problem({RecipeKind::GaussianNormalized, 6, 3, 0, 0, 0, 1});
  SolverConfig c;
  c.sampling = SamplingSpec::uniform_subset(6, 2);
  c.stepsize = ClassicConstant{1.0};
  c.max_iters = 4;
  c.residual_tol = 0.0;
  c.trace_level = TraceLevel::FullIterates;
  const SolverTrace t = run_solver(c, s);
  const Json j = Json::parse(to_json(t).dump());
  CHECK(j["status"] == "max-iters");
  CHECK(j["iterations"] == 4);
  REQUIRE(j["events"].size() == 5);
  CHECK(j["events"][0]["alpha"].is_null());
  CHECK(j["events"][0]["block"].empty());
  for (std::size_t k = 1; k <= 4; ++k) {
    const Json& ev = j["events"][k];
    CHECK(ev["alpha"] == 1.0);
    CHECK(ev["block"].size() == 2);
    for (std::size_t b = 0; b < 2; ++b)
      CHECK(ev["block"][b].get<std::size_t>() == t.events[k].block[b] + 1);
    CHECK(ev["iterate"].get<Vector>() == *t.events[k].iterate);
  }
  CHECK(j["final_iterate"].get<Vector>() == t.final_iterate);
  CHECK(j["config"]["sampling"]["tau"] == 2);
}
