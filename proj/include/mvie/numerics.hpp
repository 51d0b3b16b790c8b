#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace mvie {

using Vector = std::vector<double>;

/// Dense row-major real matrix. All public operations reject non-finite
/// entries at their boundary, so a Matrix that flows through the library is
/// finite unless a caller writes NaN into it directly.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  static Matrix from_columns(const std::vector<Vector>& columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  Vector col(std::size_t c) const;
  void set_col(std::size_t c, std::span<const double> v);

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  Matrix transpose() const;
  double frobenius_norm() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

/// Aᵀ·x without materializing the transpose.
Vector transpose_times(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double squared_distance(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Symmetric part (A + Aᵀ)/2.
Matrix symmetrize(const Matrix& a);

struct EigSymResult {
  Vector eigenvalues;  // descending
  Matrix eigenvectors; // column i pairs with eigenvalues[i]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. The input is
/// symmetrized after checking that its asymmetry is within 1e-8·max(1,‖A‖).
EigSymResult eig_sym(const Matrix& a);

struct SvdResult {
  Matrix u;        // m×k
  Vector sigma;    // k, descending
  Matrix v;        // n×k
};

/// Leading-k thin SVD, computed from the eigendecomposition of the smaller
/// Gram matrix. Intended for matrices with min(m, n) ≤ 64.
SvdResult svd_thin(const Matrix& a, std::size_t k);

/// Solves a·x = b by Gaussian elimination with partial pivoting.
/// Throws kBadRank when a pivot falls below 1e-14·‖a‖.
Vector solve_linear(const Matrix& a, std::span<const double> b);

/// Nonnegative least squares min ‖a·x − b‖ s.t. x ≥ 0 (Lawson–Hanson).
Vector nnls(const Matrix& a, std::span<const double> b);

/// Euclidean projection onto the unit simplex {s ≥ 0, 1ᵀs = 1}.
Vector project_simplex(std::span<const double> v);

/// xoshiro256** seeded through splitmix64. Used everywhere a seed appears so
/// that generated data is reproducible across platforms and standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  /// Uniform in (0, 1].
  double uniform_positive();
  /// Standard normal, Marsaglia polar method.
  double normal();
  /// Gamma(shape, 1) via Marsaglia–Tsang, boosted for shape < 1.
  double gamma(double shape);
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct KMeansResult {
  std::vector<Vector> centroids;
  std::vector<std::size_t> labels;
  /// Sum of squared distances after every assignment step, one entry per
  /// Lloyd iteration; non-increasing.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations (at most 100, or until the
/// relative objective change drops below 1e-9). Empty clusters are reseeded
/// from the point farthest from its centroid.
KMeansResult kmeans(const std::vector<Vector>& points, std::size_t k,
                    std::uint64_t seed);

}  // namespace mvie
