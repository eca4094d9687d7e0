#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "kaczlab/error.hpp"

namespace kaczlab {

using Vector = std::vector<double>;

/// Row-major dense real matrix. A default-constructed matrix is empty (0x0)
/// and only serves as a placeholder; every other constructor enforces m, n >= 1
/// and finite entries.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  DenseMatrix transposed() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Small vector helpers. Summation runs in index order so results are
// reproducible bit-for-bit.
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm_sq(std::span<const double> a) noexcept;
double norm(std::span<const double> a) noexcept;
Vector subtract(std::span<const double> a, std::span<const double> b);
Vector matvec(const DenseMatrix& a, std::span<const double> x);
Vector matvec_transpose(const DenseMatrix& a, std::span<const double> y);
Vector row_norms_sq(const DenseMatrix& a);
double frobenius_sq(const DenseMatrix& a) noexcept;
DenseMatrix select_rows(const DenseMatrix& a, std::span<const std::size_t> rows);

/// Consistent linear system Ax = b. The constructor enforces the invariants:
/// length(b) = rows(A), a planted solution (if any) satisfies the system to
/// 1e-10 (1 + |b|), and a set normalized flag means unit rows to 1e-12.
class LinearSystem {
 public:
  LinearSystem(DenseMatrix a, Vector b, std::optional<Vector> planted = std::nullopt,
               bool normalized = false);

  const DenseMatrix& matrix() const noexcept { return a_; }
  const Vector& rhs() const noexcept { return b_; }
  const std::optional<Vector>& planted_solution() const noexcept { return planted_; }
  bool normalized() const noexcept { return normalized_; }
  std::size_t rows() const noexcept { return a_.rows(); }
  std::size_t cols() const noexcept { return a_.cols(); }

  /// Euclidean norm of Ax - b.
  double residual_norm(std::span<const double> x) const;

 private:
  DenseMatrix a_;
  Vector b_;
  std::optional<Vector> planted_;
  bool normalized_ = false;
};

/// Original row norms recorded by normalize_rows.
struct RowScaling {
  Vector scales;
};

inline constexpr double kZeroRowTolerance = 1e-14;
inline constexpr double kRankTolerance = 1e-10;

bool rows_are_normalized(const DenseMatrix& a, double tol = 1e-12);

/// Divides every row a_i and b_i by |a_i|. Throws ZeroRow for rows with
/// norm < 1e-14.
std::pair<LinearSystem, RowScaling> normalize_rows(const LinearSystem& system);

struct SpectralSummary {
  Vector eigenvalues;  ///< descending
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double lambda_min_nz = 0.0;  ///< smallest eigenvalue > kRankTolerance * lambda_max
  std::size_t rank_estimate = 0;
};

struct SymmetricEigen {
  Vector values;        ///< descending
  DenseMatrix vectors;  ///< column j pairs with values[j]
};

/// Cyclic Jacobi on a symmetric matrix. Throws NotSquare, or NotSymmetric when
/// max |S_ij - S_ji| exceeds 1e-10 max(1, max |S_ij|).
SymmetricEigen sym_eigen(const DenseMatrix& s);
SpectralSummary sym_eigenvalues(const DenseMatrix& s);
SpectralSummary summarize_spectrum(Vector descending_eigenvalues);

/// Largest eigenvalue of the smaller of A^T A and A A^T.
double spectral_norm_sq(const DenseMatrix& a);

/// Spectrum of the smaller Gram matrix. The nonzero spectra of A^T A and
/// A A^T coincide, so lambda_max and lambda_min_nz are shared by both.
SpectralSummary gram_spectrum(const DenseMatrix& a);

/// Minimum-norm least-squares solver A^+ r, backed by Householder QR with
/// column pivoting and a second orthogonal factorization of the numerically
/// nonzero rows of R. The factorization is computed once and reused.
class MinNormSolver {
 public:
  explicit MinNormSolver(const DenseMatrix& a);

  Vector solve(std::span<const double> r) const;
  std::size_t rank() const noexcept { return rank_; }
  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return n_; }

 private:
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::size_t rank_ = 0;
  std::vector<std::size_t> perm_;  // column j of AP is column perm_[j] of A
  std::vector<Vector> q_vectors_;  // Householder vectors of Q (length m - k)
  Vector q_betas_;
  DenseMatrix r_top_;              // rank x n leading rows of R
  std::vector<Vector> z_vectors_;  // Householder vectors of Z (length n - k)
  Vector z_betas_;
  DenseMatrix t_;                  // rank x rank upper triangular, R_top^T = Z [T; 0]
};

Vector least_squares_min_norm(const DenseMatrix& a, std::span<const double> r);

/// Projection onto the solution set X = {x : Ax = b} with a cached
/// factorization. Throws Inconsistent when |A A^+ b - b| > 1e-6 (1 + |b|).
class SolutionProjector {
 public:
  explicit SolutionProjector(const LinearSystem& system);

  Vector project(std::span<const double> x) const;
  /// |x - Pi_X(x)|^2
  double dist_sq(std::span<const double> x) const;
  /// |A^+ r|^2 for a precomputed residual r = Ax - b; equals dist_sq(x).
  double dist_sq_from_residual(std::span<const double> residual) const;

 private:
  DenseMatrix a_;
  Vector b_;
  MinNormSolver solver_;
};

Vector project_onto_solution_set(const LinearSystem& system, std::span<const double> x);

}  // namespace kaczlab
