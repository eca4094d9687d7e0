#include "kaczlab/stepsize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace kaczlab {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw Error(ErrorKind::ConfigMismatch, "delta must lie in (0, 1], got " + std::to_string(delta));
  }
}

std::vector<std::size_t> checked_kappa(std::vector<std::size_t> kappa, std::size_t k) {
  if (kappa.empty()) return identity_permutation(k);
  if (kappa.size() != k) throw Error(ErrorKind::ConfigMismatch, "kappa length != horizon");
  std::vector<char> seen(k, 0);
  for (std::size_t v : kappa) {
    if (v >= k || seen[v]) throw Error(ErrorKind::ConfigMismatch, "kappa is not a permutation");
    seen[v] = 1;
  }
  return kappa;
}

}  // namespace

WeightScheme WeightScheme::explicit_weights(Vector v) {
  for (double w : v) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::BadWeights, "explicit weights must be positive");
    }
  }
  return {WeightKind::Explicit, std::move(v)};
}

void realize_weights(const WeightScheme& scheme, std::span<const double> row_norms_sq,
                     std::span<const std::size_t> block, std::span<double> out) {
  const std::size_t tau = block.size();
  if (scheme.kind == WeightKind::Uniform) {
    const double w = 1.0 / static_cast<double>(tau);
    for (std::size_t t = 0; t < tau; ++t) out[t] = w;
    return;
  }
  const std::span<const double> v =
      scheme.kind == WeightKind::RowNormSq ? row_norms_sq : std::span<const double>(scheme.values);
  double total = 0.0;
  for (std::size_t t = 0; t < tau; ++t) {
    if (block[t] >= v.size()) throw Error(ErrorKind::BadWeights, "weight vector too short");
    total += v[block[t]];
  }
  for (std::size_t t = 0; t < tau; ++t) out[t] = v[block[t]] / total;
}

Vector realize_weights(const WeightScheme& scheme, std::span<const double> row_norms_sq,
                       std::span<const std::size_t> block) {
  Vector out(block.size());
  realize_weights(scheme, row_norms_sq, block, out);
  return out;
}

WeightBounds weight_bounds(const WeightScheme& scheme, std::span<const double> row_norms_sq,
                           const SamplingSpec& spec) {
  if (const auto* p = spec.as_partition()) {
    WeightBounds b{1.0, 0.0};
    for (std::size_t l = 0; l < p->blocks.size(); ++l) {
      if (p->probs[l] <= 0.0) continue;
      const Vector w = realize_weights(scheme, row_norms_sq, p->blocks[l]);
      b.omega_min = std::min(b.omega_min, *std::min_element(w.begin(), w.end()));
      b.omega_max = std::max(b.omega_max, *std::max_element(w.begin(), w.end()));
    }
    return b;
  }
  const auto* u = spec.as_uniform();
  const double tau = static_cast<double>(u->tau);
  if (scheme.kind == WeightKind::Uniform || u->tau == 1) return {1.0 / tau, 1.0 / tau};

  // Extremes: the smallest value grouped with the tau-1 largest others, and
  // the largest value grouped with the tau-1 smallest others.
  const std::span<const double> src =
      scheme.kind == WeightKind::RowNormSq ? row_norms_sq : std::span<const double>(scheme.values);
  Vector v(src.begin(), src.end());
  if (v.size() < u->m) throw Error(ErrorKind::BadWeights, "weight vector too short");
  v.resize(u->m);
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  double top = 0.0;
  for (std::size_t t = 0; t + 1 < u->tau; ++t) top += v[m - 1 - t];
  double bottom = 0.0;
  for (std::size_t t = 0; t + 1 < u->tau; ++t) bottom += v[t];
  return {v.front() / (v.front() + top), v.back() / (v.back() + bottom)};
}

// ---------------------------------------------------------------------------

double chebyshev_eval(std::size_t k, double x) noexcept {
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (std::size_t j = 1; j < k; ++j) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

Vector chebyshev_roots(std::size_t k) {
  if (k == 0) throw Error(ErrorKind::BadSpectrum, "T_0 has no roots");
  Vector roots(k);
  for (std::size_t i = 1; i <= k; ++i) {
    roots[i - 1] = std::cos(static_cast<double>(2 * i - 1) * std::numbers::pi /
                            static_cast<double>(2 * k));
  }
  return roots;
}

double min_deviation_bound(double ell, double u, std::size_t k) {
  if (!(ell > 0.0 && ell < u)) throw Error(ErrorKind::BadInterval, "need 0 < ell < u");
  if (k == 0) return 1.0;
  return 1.0 / std::abs(chebyshev_eval(k, -(u + ell) / (u - ell)));
}

double chebyshev_residual_polynomial(double ell, double u, std::size_t k, double x) {
  if (!(ell > 0.0 && ell < u)) throw Error(ErrorKind::BadInterval, "need 0 < ell < u");
  const double scale = 2.0 / (u - ell);
  const double shift = (u + ell) / (u - ell);
  return chebyshev_eval(k, scale * x - shift) / chebyshev_eval(k, -shift);
}

std::vector<std::size_t> identity_permutation(std::size_t k) {
  std::vector<std::size_t> id(k);
  std::iota(id.begin(), id.end(), 0);
  return id;
}

std::vector<std::size_t> leja_order(std::span<const double> points) {
  const std::size_t k = points.size();
  std::vector<std::size_t> order;
  order.reserve(k);
  std::vector<bool> used(k, false);
  // log of the product of distances to the points already chosen
  Vector score(k, 0.0);
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = k;
    for (std::size_t i = 0; i < k; ++i) {
      if (used[i]) continue;
      const double key = step == 0 ? points[i] : score[i];
      const double best_key = best == k ? 0.0 : (step == 0 ? points[best] : score[best]);
      if (best == k || key > best_key) best = i;
    }
    used[best] = true;
    order.push_back(best);
    for (std::size_t i = 0; i < k; ++i) {
      if (!used[i]) score[i] += std::log(std::abs(points[i] - points[best]));
    }
  }
  return order;
}

std::vector<std::size_t> chebyshev_leja_kappa(std::size_t k, bool singular) {
  const double denom = static_cast<double>(singular ? 2 * (k + 1) : 2 * k);
  Vector c(k);
  for (std::size_t i = 0; i < k; ++i) {
    c[i] = std::cos(static_cast<double>(2 * i + 1) * std::numbers::pi / denom);
  }
  return leja_order(c);
}

ChebyshevSchedule chebyshev_schedule_pd(double lambda_min, double lambda_max, std::size_t m,
                                        std::size_t k, std::vector<std::size_t> kappa) {
  if (!(lambda_min > 0.0) || !(lambda_min <= lambda_max) || !std::isfinite(lambda_max)) {
    throw Error(ErrorKind::BadSpectrum, "need 0 < lambda_min <= lambda_max (got " +
                                            std::to_string(lambda_min) + ", " +
                                            std::to_string(lambda_max) + ")");
  }
  if (k == 0 || m == 0) throw Error(ErrorKind::ConfigMismatch, "horizon and m must be >= 1");
  ChebyshevSchedule s;
  s.kappa = checked_kappa(std::move(kappa), k);
  s.ell = lambda_min / static_cast<double>(m);
  s.u = lambda_max / static_cast<double>(m);
  s.alphas.resize(k);
  const double md = static_cast<double>(m);
  for (std::size_t j = 0; j < k; ++j) {
    const double c = std::cos(static_cast<double>(2 * s.kappa[j] + 1) * std::numbers::pi /
                              static_cast<double>(2 * k));
    s.alphas[j] = 2.0 * md / ((lambda_max + lambda_min) + (lambda_max - lambda_min) * c);
  }
  return s;
}

ChebyshevSchedule chebyshev_schedule_singular(double lambda_max, std::size_t m, std::size_t k,
                                              std::vector<std::size_t> kappa) {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw Error(ErrorKind::BadSpectrum, "need lambda_max > 0");
  }
  if (k == 0 || m == 0) throw Error(ErrorKind::ConfigMismatch, "horizon and m must be >= 1");
  ChebyshevSchedule s;
  s.singular = true;
  s.kappa = checked_kappa(std::move(kappa), k);
  s.ell = 0.0;
  s.u = lambda_max / static_cast<double>(m);
  const double denom = static_cast<double>(2 * (k + 1));
  const double r = std::cos(static_cast<double>(2 * k + 1) * std::numbers::pi / denom);
  s.alphas.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double c = std::cos(static_cast<double>(2 * s.kappa[j] + 1) * std::numbers::pi / denom);
    s.alphas[j] = static_cast<double>(m) * (1.0 - r) / (lambda_max * (c - r));
  }
  return s;
}

double schedule_polynomial(std::span<const double> alphas, std::size_t m, double lambda) noexcept {
  double p = 1.0;
  for (double a : alphas) p *= 1.0 - a * lambda / static_cast<double>(m);
  return p;
}

double constant_extrapolated_alpha(const WeightBounds& weights, double lambda_max_block,
                                   double delta) {
  if (!(lambda_max_block > 0.0) || !std::isfinite(lambda_max_block)) {
    throw Error(ErrorKind::NonPositiveConditioning,
                "lambda_max_block = " + std::to_string(lambda_max_block));
  }
  check_delta(delta);
  if (!(weights.omega_min > 0.0 && weights.omega_min <= weights.omega_max &&
        weights.omega_max <= 1.0)) {
    throw Error(ErrorKind::BadWeights, "invalid weight bounds");
  }
  return (2.0 - delta) * weights.omega_min /
         (weights.omega_max * weights.omega_max * lambda_max_block);
}

std::optional<AdaptiveStep> adaptive_alpha_from(double numerator, double direction_norm_sq,
                                                double delta) {
  check_delta(delta);
  if (numerator == 0.0 || direction_norm_sq < kSkipDirectionThreshold) return std::nullopt;
  const double L = numerator / direction_norm_sq;
  return AdaptiveStep{(2.0 - delta) * L, L};
}

std::optional<AdaptiveStep> adaptive_alpha(const DenseMatrix& block_rows,
                                           std::span<const double> residuals,
                                           std::span<const double> weights, double delta) {
  const std::size_t tau = block_rows.rows();
  if (residuals.size() != tau || weights.size() != tau) {
    throw Error(ErrorKind::DimensionMismatch, "adaptive_alpha: one residual and weight per row");
  }
  Vector d(block_rows.cols(), 0.0);
  double numerator = 0.0;
  for (std::size_t t = 0; t < tau; ++t) {
    const auto row = block_rows.row(t);
    const double nrm = norm_sq(row);
    if (nrm < kZeroRowTolerance * kZeroRowTolerance) throw Error(ErrorKind::ZeroRow, "block row");
    const double wbar = weights[t] / nrm;
    numerator += wbar * residuals[t] * residuals[t];
    for (std::size_t j = 0; j < d.size(); ++j) d[j] += wbar * residuals[t] * row[j];
  }
  return adaptive_alpha_from(numerator, norm_sq(d), delta);
}

}  // namespace kaczlab
