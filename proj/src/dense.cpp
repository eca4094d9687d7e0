#include "kaczlab/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kaczlab/kernels.hpp"

namespace kaczlab {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, std::string(what) + " has NaN/Inf");
  }
}

// Householder reflector H = I - beta v v^T with H x = (alpha, 0, ..., 0).
// Returns alpha; v and beta are written in place.
double make_householder(std::span<const double> x, Vector& v, double& beta) {
  v.assign(x.begin(), x.end());
  const double nrm = norm(x);
  if (nrm == 0.0) {
    beta = 0.0;
    return 0.0;
  }
  const double alpha = x[0] > 0.0 ? -nrm : nrm;
  v[0] -= alpha;
  const double vv = norm_sq(v);
  beta = vv > 0.0 ? 2.0 / vv : 0.0;
  return alpha;
}

void apply_householder(const Vector& v, double beta, std::span<double> y) {
  if (beta == 0.0) return;
  const double s = beta * dot(v, y);
  for (std::size_t i = 0; i < v.size(); ++i) y[i] -= s * v[i];
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw Error(ErrorKind::BadDimensions, "matrix needs m, n >= 1");
  if (!std::isfinite(fill)) throw Error(ErrorKind::NonFinite, "fill value");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (rows == 0 || cols == 0) throw Error(ErrorKind::BadDimensions, "matrix needs m, n >= 1");
  if (data_.size() != rows * cols) {
    throw Error(ErrorKind::DimensionMismatch,
                "entry count " + std::to_string(data_.size()) + " != " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
  require_finite(data_, "matrix");
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(m * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw Error(ErrorKind::DimensionMismatch, "ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return DenseMatrix(m, n, std::move(data));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix id(n, n);
  for (std::size_t i = 0; i < n; ++i) id(i, i) = 1.0;
  return id;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

// ---------------------------------------------------------------------------
// vector helpers

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(std::span<const double> a) noexcept { return dot(a, a); }

double norm(std::span<const double> a) noexcept { return std::sqrt(norm_sq(a)); }

Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "matvec: |x| != cols(A)");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector matvec_transpose(const DenseMatrix& a, std::span<const double> y) {
  if (y.size() != a.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "matvec_transpose: |y| != rows(A)");
  }
  Vector x(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) x[j] += y[i] * r[j];
  }
  return x;
}

Vector row_norms_sq(const DenseMatrix& a) {
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = norm_sq(a.row(i));
  return out;
}

double frobenius_sq(const DenseMatrix& a) noexcept { return norm_sq(a.data()); }

DenseMatrix select_rows(const DenseMatrix& a, std::span<const std::size_t> rows) {
  DenseMatrix out(rows.size(), a.cols());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t] >= a.rows()) throw Error(ErrorKind::IndexOutOfRange, "select_rows");
    std::copy_n(a.row(rows[t]).begin(), a.cols(), out.row(t).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// LinearSystem

LinearSystem::LinearSystem(DenseMatrix a, Vector b, std::optional<Vector> planted,
                           bool normalized)
    : a_(std::move(a)), b_(std::move(b)), planted_(std::move(planted)), normalized_(normalized) {
  if (a_.empty()) throw Error(ErrorKind::BadDimensions, "empty matrix");
  if (b_.size() != a_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "length(b) = " + std::to_string(b_.size()) +
                                                  " but rows(A) = " + std::to_string(a_.rows()));
  }
  require_finite(b_, "right-hand side");
  if (planted_) {
    if (planted_->size() != a_.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "planted solution length != cols(A)");
    }
    require_finite(*planted_, "planted solution");
    const double res = residual_norm(*planted_);
    if (res > 1e-10 * (1.0 + norm(b_))) {
      throw Error(ErrorKind::Inconsistent,
                  "planted solution residual " + std::to_string(res) + " too large");
    }
  }
  if (normalized_ && !rows_are_normalized(a_)) {
    throw Error(ErrorKind::NotNormalized, "normalized flag set but rows are not unit length");
  }
}

double LinearSystem::residual_norm(std::span<const double> x) const {
  return norm(subtract(matvec(a_, x), b_));
}

bool rows_are_normalized(const DenseMatrix& a, double tol) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (std::abs(norm(a.row(i)) - 1.0) > tol) return false;
  }
  return true;
}

std::pair<LinearSystem, RowScaling> normalize_rows(const LinearSystem& system) {
  const DenseMatrix& a = system.matrix();
  DenseMatrix scaled = a;
  Vector b = system.rhs();
  RowScaling scaling{Vector(a.rows())};
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double nrm = norm(a.row(i));
    if (nrm < kZeroRowTolerance) {
      throw Error(ErrorKind::ZeroRow, "row " + std::to_string(i) + " has norm " +
                                          std::to_string(nrm));
    }
    for (double& v : scaled.row(i)) v /= nrm;
    b[i] /= nrm;
    scaling.scales[i] = nrm;
  }
  return {LinearSystem(std::move(scaled), std::move(b), system.planted_solution(), true),
          std::move(scaling)};
}

// ---------------------------------------------------------------------------
// symmetric eigenvalues

SymmetricEigen sym_eigen(const DenseMatrix& s) {
  if (s.empty() || s.rows() != s.cols()) throw Error(ErrorKind::NotSquare, "sym_eigen");
  const std::size_t n = s.rows();

  double max_abs = 0.0;
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      max_abs = std::max(max_abs, std::abs(s(i, j)));
      asym = std::max(asym, std::abs(s(i, j) - s(j, i)));
    }
  }
  if (asym > 1e-10 * std::max(1.0, max_abs)) {
    throw Error(ErrorKind::NotSymmetric, "asymmetry " + std::to_string(asym));
  }

  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (s(i, j) + s(j, i));
  DenseMatrix v = DenseMatrix::identity(n);

  const double fro = std::sqrt(frobenius_sq(a));
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && fro > 0.0; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-15 * fro) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // negligible off-diagonal entry relative to both diagonal entries
        if (std::abs(apq) < 1e-18 * std::abs(app) && std::abs(apq) < 1e-18 * std::abs(aqq)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymmetricEigen out{Vector(n), DenseMatrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = v(k, order[j]);
  }
  return out;
}

SpectralSummary summarize_spectrum(Vector eig) {
  SpectralSummary out;
  out.eigenvalues = std::move(eig);
  if (out.eigenvalues.empty()) return out;
  out.lambda_max = out.eigenvalues.front();
  out.lambda_min = out.eigenvalues.back();
  const double cut = kRankTolerance * out.lambda_max;
  for (double lam : out.eigenvalues) {
    if (lam > cut) {
      ++out.rank_estimate;
      out.lambda_min_nz = lam;
    }
  }
  return out;
}

SpectralSummary sym_eigenvalues(const DenseMatrix& s) {
  return summarize_spectrum(sym_eigen(s).values);
}

SpectralSummary gram_spectrum(const DenseMatrix& a) {
  if (a.rows() <= a.cols()) {
    return sym_eigenvalues(kernels::gram_rows(kernels::Backend::OpenMP, a));
  }
  const Vector ones(a.rows(), 1.0);
  return sym_eigenvalues(kernels::weighted_gram_cols(kernels::Backend::OpenMP, a, ones));
}

double spectral_norm_sq(const DenseMatrix& a) { return gram_spectrum(a).lambda_max; }

// ---------------------------------------------------------------------------
// minimum-norm least squares

MinNormSolver::MinNormSolver(const DenseMatrix& a) : m_(a.rows()), n_(a.cols()), perm_(n_) {
  std::iota(perm_.begin(), perm_.end(), 0);
  DenseMatrix w = a;
  const std::size_t kmax = std::min(m_, n_);
  double reference = 0.0;
  Vector col(m_);
  Vector v;

  for (std::size_t k = 0; k < kmax; ++k) {
    std::size_t pivot = k;
    double best = -1.0;
    for (std::size_t j = k; j < n_; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m_; ++i) s += w(i, j) * w(i, j);
      if (s > best) {
        best = s;
        pivot = j;
      }
    }
    const double pivot_norm = std::sqrt(best);
    if (k == 0) {
      reference = pivot_norm;
      if (reference == 0.0) break;
    } else if (pivot_norm <= kRankTolerance * reference) {
      break;
    }
    if (pivot != k) {
      for (std::size_t i = 0; i < m_; ++i) std::swap(w(i, k), w(i, pivot));
      std::swap(perm_[k], perm_[pivot]);
    }

    const std::size_t len = m_ - k;
    for (std::size_t i = 0; i < len; ++i) col[i] = w(k + i, k);
    double beta = 0.0;
    const double alpha = make_householder(std::span<const double>(col.data(), len), v, beta);
    for (std::size_t j = k; j < n_; ++j) {
      for (std::size_t i = 0; i < len; ++i) col[i] = w(k + i, j);
      apply_householder(v, beta, std::span<double>(col.data(), len));
      for (std::size_t i = 0; i < len; ++i) w(k + i, j) = col[i];
    }
    w(k, k) = alpha;
    for (std::size_t i = 1; i < len; ++i) w(k + i, k) = 0.0;
    q_vectors_.push_back(v);
    q_betas_.push_back(beta);
    rank_ = k + 1;
  }

  if (rank_ == 0) return;
  r_top_ = DenseMatrix(rank_, n_);
  for (std::size_t i = 0; i < rank_; ++i)
    for (std::size_t j = i; j < n_; ++j) r_top_(i, j) = w(i, j);

  if (rank_ < n_) {
    // R_top^T (n x rank) = Z [T; 0]
    DenseMatrix mt = r_top_.transposed();
    Vector zc(n_);
    for (std::size_t k = 0; k < rank_; ++k) {
      const std::size_t len = n_ - k;
      for (std::size_t i = 0; i < len; ++i) zc[i] = mt(k + i, k);
      double beta = 0.0;
      const double alpha = make_householder(std::span<const double>(zc.data(), len), v, beta);
      for (std::size_t j = k; j < rank_; ++j) {
        for (std::size_t i = 0; i < len; ++i) zc[i] = mt(k + i, j);
        apply_householder(v, beta, std::span<double>(zc.data(), len));
        for (std::size_t i = 0; i < len; ++i) mt(k + i, j) = zc[i];
      }
      mt(k, k) = alpha;
      z_vectors_.push_back(v);
      z_betas_.push_back(beta);
    }
    t_ = DenseMatrix(rank_, rank_);
    for (std::size_t i = 0; i < rank_; ++i)
      for (std::size_t j = i; j < rank_; ++j) t_(i, j) = mt(i, j);
  }
}

Vector MinNormSolver::solve(std::span<const double> r) const {
  if (r.size() != m_) throw Error(ErrorKind::DimensionMismatch, "least squares: |r| != rows(A)");
  Vector x(n_, 0.0);
  if (rank_ == 0) return x;

  Vector c(r.begin(), r.end());
  for (std::size_t k = 0; k < rank_; ++k) {
    apply_householder(q_vectors_[k], q_betas_[k], std::span<double>(c.data() + k, m_ - k));
  }

  Vector y(n_, 0.0);
  if (rank_ == n_) {
    for (std::size_t ii = rank_; ii-- > 0;) {
      double s = c[ii];
      for (std::size_t j = ii + 1; j < rank_; ++j) s -= r_top_(ii, j) * y[j];
      y[ii] = s / r_top_(ii, ii);
    }
  } else {
    // T^T w = c_1 (forward substitution), then y = Z [w; 0]
    for (std::size_t i = 0; i < rank_; ++i) {
      double s = c[i];
      for (std::size_t j = 0; j < i; ++j) s -= t_(j, i) * y[j];
      y[i] = s / t_(i, i);
    }
    for (std::size_t k = rank_; k-- > 0;) {
      apply_householder(z_vectors_[k], z_betas_[k], std::span<double>(y.data() + k, n_ - k));
    }
  }
  for (std::size_t j = 0; j < n_; ++j) x[perm_[j]] = y[j];
  return x;
}

Vector least_squares_min_norm(const DenseMatrix& a, std::span<const double> r) {
  return MinNormSolver(a).solve(r);
}

// ---------------------------------------------------------------------------
// projection onto the solution set

SolutionProjector::SolutionProjector(const LinearSystem& system)
    : a_(system.matrix()), b_(system.rhs()), solver_(system.matrix()) {
  const Vector xb = solver_.solve(b_);
  const double res = norm(subtract(matvec(a_, xb), b_));
  if (res > 1e-6 * (1.0 + norm(b_))) {
    throw Error(ErrorKind::Inconsistent, "|A A^+ b - b| = " + std::to_string(res));
  }
}

Vector SolutionProjector::project(std::span<const double> x) const {
  const Vector correction = solver_.solve(subtract(matvec(a_, x), b_));
  return subtract(x, correction);
}

double SolutionProjector::dist_sq(std::span<const double> x) const {
  return norm_sq(solver_.solve(subtract(matvec(a_, x), b_)));
}

double SolutionProjector::dist_sq_from_residual(std::span<const double> residual) const {
  return norm_sq(solver_.solve(residual));
}

Vector project_onto_solution_set(const LinearSystem& system, std::span<const double> x) {
  return SolutionProjector(system).project(x);
}

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ZeroRow: return "ZeroRow";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Inconsistent: return "Inconsistent";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::BadBlockCount: return "BadBlockCount";
    case ErrorKind::BadSampling: return "BadSampling";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::NonPositiveConditioning: return "NonPositiveConditioning";
    case ErrorKind::BadSpectrum: return "BadSpectrum";
    case ErrorKind::BadInterval: return "BadInterval";
    case ErrorKind::BadWeights: return "BadWeights";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
    case ErrorKind::MissingSpectrum: return "MissingSpectrum";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::BadDimensions: return "BadDimensions";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace kaczlab
