#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "kaczlab/analysis.hpp"
#include "kaczlab/problems.hpp"
#include "kaczlab/stepsize.hpp"

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

/// |d|^2 and numerator of the adaptive rule, written out directly.
std::pair<double, double> adaptive_parts(const DenseMatrix& rows, const Vector& r, const Vector& w) {
  const std::size_t n = rows.cols();
  Vector d(n, 0.0);
  double num = 0.0;
  for (std::size_t t = 0; t < rows.rows(); ++t) {
    const double wb = w[t] / norm_sq(rows.row(t));
    num += wb * r[t] * r[t];
    for (std::size_t j = 0; j < n; ++j) d[j] += wb * r[t] * rows(t, j);
  }
  return {num, norm_sq(d)};
}

}  // namespace

TEST_CASE("chebyshev_eval examples") {
  CHECK(chebyshev_eval(3, 0.5) == doctest::Approx(-1.0).epsilon(1e-15));
  for (std::size_t k = 0; k <= 10; ++k) CHECK(chebyshev_eval(k, 1.0) == 1.0);
  CHECK(std::abs(chebyshev_eval(5, std::cos(0.3)) - std::cos(1.5)) <= 1e-12);
  CHECK(chebyshev_eval(0, 7.0) == 1.0);
  CHECK(chebyshev_eval(1, 7.0) == 7.0);
  // outside [-1, 1]: cosh form
  CHECK(chebyshev_eval(4, 1.5) == doctest::Approx(std::cosh(4 * std::acosh(1.5))).epsilon(1e-13));
}

TEST_CASE("chebyshev_roots examples") {
  CHECK(chebyshev_roots(1).size() == 1);
  CHECK(std::abs(chebyshev_roots(1)[0]) <= 1e-16);
  const Vector r2 = chebyshev_roots(2);
  CHECK(r2[0] == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-15));
  CHECK(r2[1] == doctest::Approx(-std::sqrt(2.0) / 2).epsilon(1e-15));
  for (std::size_t k = 1; k <= 12; ++k) {
    const Vector r = chebyshev_roots(k);
    CHECK(std::is_sorted(r.begin(), r.end(), std::greater<>()));
    for (double x : r) CHECK(std::abs(chebyshev_eval(k, x)) <= 1e-12);
  }
}

TEST_CASE("constant_extrapolated_alpha examples") {
  CHECK(constant_extrapolated_alpha({0.25, 0.25}, 1.0, 1.0) == doctest::Approx(4.0));
  CHECK(constant_extrapolated_alpha({1.0, 1.0}, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(constant_extrapolated_alpha({0.5, 0.5}, 2.0, 1.0) == doctest::Approx(1.0));
  CHECK(constant_extrapolated_alpha({0.25, 0.25}, 1.0, 0.5) == doctest::Approx(6.0));
  CHECK(kind_of([] { constant_extrapolated_alpha({0.5, 0.5}, 0.0, 1.0); }) ==
        ErrorKind::NonPositiveConditioning);
  CHECK(kind_of([] { constant_extrapolated_alpha({0.5, 0.5}, 1.0, 1.5); }) ==
        ErrorKind::ConfigMismatch);
}

TEST_CASE("adaptive_alpha examples") {
  const DenseMatrix ortho = DenseMatrix::from_rows({{1, 0}, {0, 1}});
  const auto a = adaptive_alpha(ortho, Vector{1, 1}, Vector{0.5, 0.5}, 1.0);
  REQUIRE(a.has_value());
  CHECK(a->L == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(a->alpha == doctest::Approx(2.0).epsilon(1e-15));

  CHECK_FALSE(adaptive_alpha(ortho, Vector{0, 0}, Vector{0.5, 0.5}, 1.0).has_value());

  const double h = std::sqrt(2.0) / 2;
  const DenseMatrix skew = DenseMatrix::from_rows({{1, 0}, {h, h}});
  const auto s = adaptive_alpha(skew, Vector{1, 1}, Vector{0.5, 0.5}, 1.0);
  REQUIRE(s.has_value());
  CHECK(s->L == doctest::Approx(4.0 / (2.0 + std::sqrt(2.0))).epsilon(1e-14));
  CHECK(s->alpha == doctest::Approx(1.17157287525381).epsilon(1e-12));

  // cancelling direction with nonzero residuals
  const DenseMatrix twin = DenseMatrix::from_rows({{1, 0}, {1, 0}});
  CHECK_FALSE(adaptive_alpha(twin, Vector{1, -1}, Vector{0.5, 0.5}, 1.0).has_value());
  CHECK_FALSE(adaptive_alpha_from(0.0, 1.0, 1.0).has_value());
  CHECK_FALSE(adaptive_alpha_from(1.0, 1e-29, 1.0).has_value());
}

TEST_CASE("adaptive L: Jensen, block lower bound, dominance and the delta -> 0 limit") {
  Rng rng = make_rng(17);
  for (std::uint64_t seed : {1, 2, 3}) {
    const LinearSystem sys = generate_problem({RecipeKind::CoherentRows, 30, 10, 0, 0.6, 0, seed});
    const Vector norms = row_norms_sq(sys.matrix());
    for (std::size_t tau : {2, 5, 9}) {
      const SamplingSpec spec = SamplingSpec::uniform_subset(30, tau);
      for (int t = 0; t < 100; ++t) {
        const Block blk = sample_block(spec, rng);
        const DenseMatrix rows = select_rows(sys.matrix(), blk);
        Vector r(tau);
        for (double& v : r) v = standard_normal(rng);
        for (const WeightScheme& ws : {WeightScheme::uniform(), WeightScheme::row_norm_sq()}) {
          const Vector w = realize_weights(ws, norms, blk);
          const double omega_max = *std::max_element(w.begin(), w.end());
          const auto step = adaptive_alpha(rows, r, w, 1.0);
          REQUIRE(step.has_value());
          CHECK(step->L >= 1.0 - 1e-12);
          const double lb_block = block_gram_lambda_max(sys.matrix(), norms, blk);
          CHECK(step->L >= 1.0 / (omega_max * lb_block) - 1e-8);

          // normalized rows with uniform weights: adaptive >= constant
          if (ws.kind == WeightKind::Uniform) {
            const double tau_d = double(tau);
            const double constant = constant_extrapolated_alpha({1 / tau_d, 1 / tau_d}, lb_block, 1.0);
            CHECK(step->alpha >= constant - 1e-8);
          }

          const auto [num, dsq] = adaptive_parts(rows, r, w);
          CHECK(step->L == doctest::Approx(num / dsq).epsilon(1e-12));
          const auto tiny = adaptive_alpha(rows, r, w, 1e-13);
          REQUIRE(tiny.has_value());
          CHECK(std::abs(tiny->alpha - 2.0 * num / dsq) <= 1e-10 * (2.0 * num / dsq));
        }
      }
    }
  }
}

TEST_CASE("weights") {
  const Vector norms{1.0, 4.0, 9.0, 16.0};
  const Block blk{1, 3};
  const Vector u = realize_weights(WeightScheme::uniform(), norms, blk);
  CHECK(u == Vector{0.5, 0.5});
  const Vector r = realize_weights(WeightScheme::row_norm_sq(), norms, blk);
  CHECK(r[0] == doctest::Approx(0.2));
  CHECK(r[1] == doctest::Approx(0.8));
  const Vector e = realize_weights(WeightScheme::explicit_weights({1, 2, 3, 6}), norms, blk);
  CHECK(e[0] == doctest::Approx(0.25));
  CHECK(kind_of([] { WeightScheme::explicit_weights({1, 0}); }) == ErrorKind::BadWeights);

  const WeightBounds ub = weight_bounds(WeightScheme::uniform(), norms, SamplingSpec::uniform_subset(4, 2));
  CHECK(ub.omega_min == 0.5);
  CHECK(ub.omega_max == 0.5);
  const WeightBounds rb =
      weight_bounds(WeightScheme::row_norm_sq(), norms, SamplingSpec::uniform_subset(4, 2));
  CHECK(rb.omega_min == doctest::Approx(1.0 / 17.0));
  CHECK(rb.omega_max == doctest::Approx(16.0 / 17.0));
  const WeightBounds pb = weight_bounds(WeightScheme::uniform(), norms,
                                        SamplingSpec::partition_uniform(4, {{0, 1, 2}, {3}}));
  CHECK(pb.omega_min == doctest::Approx(1.0 / 3.0));
  CHECK(pb.omega_max == 1.0);
}

TEST_CASE("chebyshev_schedule_pd examples") {
  const ChebyshevSchedule flat = chebyshev_schedule_pd(2.0, 2.0, 6, 5);
  for (double a : flat.alphas) CHECK(a == doctest::Approx(3.0).epsilon(1e-14));

  const ChebyshevSchedule one = chebyshev_schedule_pd(1.0, 3.0, 4, 1);
  REQUIRE(one.alphas.size() == 1);
  CHECK(one.alphas[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(one.ell == 0.25);
  CHECK(one.u == 0.75);

  // inverse-root property: 1/alpha_j (scaled by m) are roots of the shifted T_3
  const ChebyshevSchedule three = chebyshev_schedule_pd(1.0, 4.0, 2, 3);
  for (double a : three.alphas) {
    const double lam = 2.0 / a;  // eigenvalue of A A^T killed by this step
    CHECK(std::abs(chebyshev_eval(3, (2 * lam - 5.0) / 3.0)) <= 1e-10);
    CHECK(a >= 2.0 / 4.0 * (1 - 1e-12));
    CHECK(a <= 2.0 / 1.0 * (1 + 1e-12));
  }
  CHECK(kind_of([] { chebyshev_schedule_pd(0.0, 1.0, 2, 3); }) == ErrorKind::BadSpectrum);
  CHECK(kind_of([] { chebyshev_schedule_pd(2.0, 1.0, 2, 3); }) == ErrorKind::BadSpectrum);
  CHECK(kind_of([] { chebyshev_schedule_pd(1.0, 2.0, 2, 3, {0, 0, 1}); }) ==
        ErrorKind::ConfigMismatch);
}

TEST_CASE("closed form of every pd schedule entry") {
  for (std::size_t k : {1, 4, 9}) {
    const std::vector<std::size_t> kappa = chebyshev_leja_kappa(k, false);
    const ChebyshevSchedule s = chebyshev_schedule_pd(0.2, 3.0, 7, k, kappa);
    for (std::size_t j = 0; j < k; ++j) {
      const double c = std::cos((2.0 * kappa[j] + 1) * std::numbers::pi / (2.0 * k));
      const double ref = 14.0 / (3.2 + 2.8 * c);
      CHECK(std::abs(s.alphas[j] - ref) <= 1e-12 * ref);
    }
  }
}

TEST_CASE("chebyshev_schedule_singular examples") {
  const ChebyshevSchedule s = chebyshev_schedule_singular(2.0, 2, 1);
  CHECK(s.alphas[0] == doctest::Approx(1.20710678118655).epsilon(1e-12));
  CHECK(s.singular);
  for (std::size_t k = 1; k <= 40; ++k) {
    const ChebyshevSchedule t = chebyshev_schedule_singular(3.0, 5, k);
    CHECK(*std::min_element(t.alphas.begin(), t.alphas.end()) > 0.0);
  }
  // Q(lambda) = lambda prod (1 - alpha_j lambda): Q(0) = 0, Q'(0) = 1
  const ChebyshevSchedule two = chebyshev_schedule_singular(1.0, 1, 2);
  auto q = [&](double lam) { return lam * schedule_polynomial(two.alphas, 1, lam); };
  CHECK(std::abs(q(0.0)) <= 1e-10);
  const double h = 1e-6;
  CHECK(std::abs((q(h) - q(-h)) / (2 * h) - 1.0) <= 1e-10);
  CHECK(kind_of([] { chebyshev_schedule_singular(0.0, 2, 3); }) == ErrorKind::BadSpectrum);
}

TEST_CASE("min_deviation_bound examples and optimality") {
  CHECK(min_deviation_bound(1.0, 4.0, 0) == 1.0);
  CHECK(min_deviation_bound(1.0, 1.0 + 1e-9, 1) <= 1e-8);
  const double v = min_deviation_bound(1.0, 4.0, 5);
  CHECK(v == doctest::Approx(1.0 / std::abs(chebyshev_eval(5, -5.0 / 3.0))).epsilon(1e-14));
  CHECK(v <= 2.0 / 243.0);
  CHECK(kind_of([] { min_deviation_bound(0.0, 1.0, 2); }) == ErrorKind::BadInterval);
  CHECK(kind_of([] { min_deviation_bound(2.0, 1.0, 2); }) == ErrorKind::BadInterval);

  Rng rng = make_rng(3);
  for (auto [l, u] : std::vector<std::pair<double, double>>{{1, 4}, {0.05, 1}, {2, 2.5}}) {
    for (std::size_t k = 1; k <= 7; ++k) {
      const double opt = min_deviation_bound(l, u, k);
      const double rho = (std::sqrt(u) - std::sqrt(l)) / (std::sqrt(u) + std::sqrt(l));
      CHECK(opt <= 2 * std::pow(rho, double(k)) * (1 + 1e-12));
      // the optimal polynomial attains the bound on the interval
      double attained = 0.0;
      for (int g = 0; g < 1000; ++g)
        attained = std::max(attained, std::abs(chebyshev_residual_polynomial(l, u, k, l + (u - l) * g / 999.0)));
      CHECK(attained == doctest::Approx(opt).epsilon(1e-9));
      CHECK(chebyshev_residual_polynomial(l, u, k, 0.0) == doctest::Approx(1.0));
      for (int c = 0; c < 20; ++c) {
        double worst = 0.0;
        Vector roots;
        for (double r : chebyshev_roots(k))
          roots.push_back(std::clamp(0.5 * (u + l) + 0.5 * (u - l) * r + 0.1 * (u - l) * (uniform_unit(rng) - 0.5), l, u));
        for (int g = 0; g < 1000; ++g) {
          const double x = l + (u - l) * g / 999.0;
          double p = 1.0;
          for (double r : roots) p *= 1.0 - x / r;
          worst = std::max(worst, std::abs(p));
        }
        CHECK(worst >= opt - 1e-8);
      }
    }
  }
}

TEST_CASE("schedule polynomial is kappa-invariant and matches the residual polynomial") {
  Rng rng = make_rng(8);
  for (std::size_t k : {3, 10, 25}) {
    const ChebyshevSchedule base = chebyshev_schedule_pd(0.5, 6.0, 3, k);
    const ChebyshevSchedule leja = chebyshev_schedule_pd(0.5, 6.0, 3, k, chebyshev_leja_kappa(k, false));
    const ChebyshevSchedule rnd = chebyshev_schedule_pd(0.5, 6.0, 3, k, random_permutation(rng, k));
    for (double lam = 0.0; lam <= 6.0; lam += 0.1) {
      const double p = schedule_polynomial(base.alphas, 3, lam);
      CHECK(std::abs(p - schedule_polynomial(leja.alphas, 3, lam)) <= 1e-10);
      CHECK(std::abs(p - schedule_polynomial(rnd.alphas, 3, lam)) <= 1e-10);
      if (lam >= 0.5) {
        CHECK(std::abs(p - chebyshev_residual_polynomial(0.5 / 3, 2.0, k, lam / 3)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("Leja order") {
  const Vector pts{0.1, 0.9, -0.5, 0.3, -1.0};
  const auto order = leja_order(pts);
  CHECK(order.size() == 5);
  CHECK(std::set<std::size_t>(order.begin(), order.end()).size() == 5);
  CHECK(order[0] == 1);  // largest point first
  CHECK(order[1] == 4);  // farthest from 0.9
  for (std::size_t k : {1, 2, 7, 60}) {
    for (bool singular : {false, true}) {
      const auto kappa = chebyshev_leja_kappa(k, singular);
      CHECK(kappa.size() == k);
      CHECK(std::set<std::size_t>(kappa.begin(), kappa.end()).size() == k);
      CHECK(kappa[0] == 0);
    }
  }
  // An error made at step j is multiplied by prod_{i >= j} (1 - alpha_i lambda).
  const std::size_t k = 60;
  const ChebyshevSchedule s = chebyshev_schedule_pd(1e-3, 4.0, 1, k, chebyshev_leja_kappa(k, false));
  const ChebyshevSchedule id = chebyshev_schedule_pd(1e-3, 4.0, 1, k);
  auto growth = [&](const Vector& alphas) {
    double worst = 0.0;
    for (double lam = 1e-3; lam <= 4.0; lam *= 1.05) {
      double p = 1.0;
      for (std::size_t j = alphas.size(); j-- > 0;) {
        p *= 1.0 - alphas[j] * lam;
        worst = std::max(worst, std::abs(p));
      }
    }
    return worst;
  };
  CHECK(growth(s.alphas) < 1e6);
  CHECK(growth(id.alphas) > 1e12);
}
