#include "mvie/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mvie/error.hpp"

namespace mvie {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimMismatch, "matrix data length does not match shape");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw Error(ErrorCode::kDimMismatch, "ragged matrix initializer");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_columns(const std::vector<Vector>& columns) {
  if (columns.empty()) return {};
  Matrix m(columns.front().size(), columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].size() != m.rows()) {
      throw Error(ErrorCode::kDimMismatch, "columns of unequal length");
    }
    m.set_col(c, columns[c]);
  }
  return m;
}

Vector Matrix::col(std::size_t c) const {
  Vector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

void Matrix::set_col(std::size_t c, std::span<const double> v) {
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Matrix::frobenius_norm() const { return norm(data_); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorCode::kDimMismatch, "matrix +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorCode::kDimMismatch, "matrix -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::kDimMismatch, "matrix product");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw Error(ErrorCode::kDimMismatch, "matrix-vector product");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector transpose_times(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw Error(ErrorCode::kDimMismatch, "transpose-vector product");
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) axpy(x[i], a.row(i), y);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Matrix symmetrize(const Matrix& a) {
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

EigSymResult eig_sym(const Matrix& input) {
  if (input.rows() != input.cols()) throw Error(ErrorCode::kNonSquare, "eig_sym");
  if (!input.all_finite()) throw Error(ErrorCode::kNotFinite, "eig_sym");
  const std::size_t n = input.rows();
  const double scale = std::max(1.0, input.frobenius_norm());
  if ((input - input.transpose()).frobenius_norm() > 1e-8 * scale) {
    throw Error(ErrorCode::kInvalidArgument, "eig_sym input is not symmetric");
  }

  Matrix a = symmetrize(input);
  Matrix v = Matrix::identity(n);

  auto off_diagonal = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  constexpr int kMaxSweeps = 100;
  const double tiny = std::numeric_limits<double>::min();
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    const double off = off_diagonal();
    if (off <= 1e-15 * a.frobenius_norm() || off <= tiny) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation annihilating a(p,q), in the stable tangent form.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == kMaxSweeps) throw Error(ErrorCode::kConvergenceFailure, "Jacobi sweeps exhausted");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigSymResult out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = v(r, order[k]);
  }
  return out;
}

namespace {

// Orthonormalizes the columns of m in place (two passes of modified
// Gram–Schmidt). Columns that vanish are replaced by the first standard basis
// vector that is not already in the span.
void orthonormalize_columns(Matrix& m) {
  const std::size_t rows = m.rows();
  std::size_t next_basis = 0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    Vector v = m.col(c);
    const double original = norm(v);
    for (int attempt = 0;; ++attempt) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t p = 0; p < c; ++p) {
          const Vector u = m.col(p);
          axpy(-dot(u, v), u, v);
        }
      }
      const double nv = norm(v);
      if (nv > 1e-8 * std::max(original, 1e-300) && nv > 1e-150) {
        for (double& x : v) x /= nv;
        break;
      }
      if (next_basis >= rows || attempt > static_cast<int>(rows)) {
        throw Error(ErrorCode::kConvergenceFailure, "cannot complete orthonormal basis");
      }
      v.assign(rows, 0.0);
      v[next_basis++] = 1.0;
    }
    m.set_col(c, v);
  }
}

}  // namespace

SvdResult svd_thin(const Matrix& a, std::size_t k) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (k < 1 || k > std::min(m, n)) throw Error(ErrorCode::kBadRank, "svd_thin rank out of range");
  if (!a.all_finite()) throw Error(ErrorCode::kNotFinite, "svd_thin");

  const bool tall = m >= n;
  // Gram matrix on the smaller side.
  const Matrix gram = tall ? a.transpose() * a : a * a.transpose();
  const EigSymResult eig = eig_sym(symmetrize(gram));
  const std::size_t small = gram.rows();
  const std::size_t big = tall ? m : n;

  SvdResult out{Matrix(m, k), Vector(k), Matrix(n, k)};
  Matrix small_vecs(small, k);
  Matrix big_vecs(big, k);
  for (std::size_t j = 0; j < k; ++j) {
    const double sigma = std::sqrt(std::max(eig.eigenvalues[j], 0.0));
    out.sigma[j] = sigma;
    const Vector w = eig.eigenvectors.col(j);
    small_vecs.set_col(j, w);
    Vector z = tall ? a * w : transpose_times(a, w);
    if (sigma > 0.0) {
      for (double& x : z) x /= sigma;
    }
    big_vecs.set_col(j, z);
  }
  orthonormalize_columns(big_vecs);
  if (tall) {
    out.v = std::move(small_vecs);
    out.u = std::move(big_vecs);
  } else {
    out.u = std::move(small_vecs);
    out.v = std::move(big_vecs);
  }
  return out;
}

Vector project_simplex(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorCode::kBadDims, "project_simplex on empty vector");
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNotFinite, "project_simplex");
  }
  Vector sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform_positive() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma shape must be positive");
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a+1) · U^(1/a); done in log space because U^(1/a)
    // underflows for small a.
    const double g = gamma(shape + 1.0);
    const double log_u = std::log(uniform_positive()) / shape;
    return g * std::exp(log_u);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_positive();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "Rng::below(0)");
  // Lemire's nearly-divisionless method.
  const std::uint64_t range = n;
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

KMeansResult kmeans(const std::vector<Vector>& points, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "kmeans needs k >= 1");
  if (points.size() < k) throw Error(ErrorCode::kTooFewPoints, "kmeans needs at least k points");
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw Error(ErrorCode::kDimMismatch, "kmeans points of unequal dimension");
    for (double x : p)
      if (!std::isfinite(x)) throw Error(ErrorCode::kNotFinite, "kmeans");
  }
  const std::size_t n = points.size();
  Rng rng(seed);

  // k-means++ seeding.
  KMeansResult out;
  out.centroids.push_back(points[rng.below(n)]);
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i) best[i] = squared_distance(points[i], out.centroids[0]);
  while (out.centroids.size() < k) {
    const double total = std::accumulate(best.begin(), best.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= best[i];
        if (target < 0.0 && best[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      // All remaining mass is zero: duplicates only. Take unused indices.
      pick = out.centroids.size();
    }
    out.centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i)
      best[i] = std::min(best[i], squared_distance(points[i], out.centroids.back()));
  }

  out.labels.assign(n, 0);
  std::vector<double> dist(n);
  double previous = std::numeric_limits<double>::infinity();
  constexpr std::size_t kMaxIter = 100;
  for (std::size_t iter = 0; iter < kMaxIter; ++iter) {
    // Assignment; ties go to the lowest centroid index.
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t arg = 0;
      double d = squared_distance(points[i], out.centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double dc = squared_distance(points[i], out.centroids[c]);
        if (dc < d) {
          d = dc;
          arg = c;
        }
      }
      out.labels[i] = arg;
      dist[i] = d;
      objective += d;
    }

    // Reseed empty clusters from the point farthest from its own centroid.
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t l : out.labels) ++counts[l];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      constexpr std::size_t kNone = static_cast<std::size_t>(-1);
      std::size_t far = kNone;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[out.labels[i]] > 1 && (far == kNone || dist[i] > dist[far])) far = i;
      }
      if (far == kNone) throw Error(ErrorCode::kDegenerateCluster, "cannot reseed empty cluster");
      --counts[out.labels[far]];
      objective -= dist[far];
      out.labels[far] = c;
      out.centroids[c] = points[far];
      dist[far] = 0.0;
      counts[c] = 1;
    }
    out.objective_trace.push_back(objective);
    out.iterations = iter + 1;

    // Update step.
    std::vector<Vector> sums(k, Vector(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) axpy(1.0, points[i], sums[out.labels[i]]);
    for (std::size_t c = 0; c < k; ++c) {
      for (double& x : sums[c]) x /= static_cast<double>(counts[c]);
      out.centroids[c] = std::move(sums[c]);
    }

    if (std::abs(previous - objective) <= 1e-9 * std::max(objective, 1e-300) || objective == 0.0) break;
    previous = objective;
  }
  return out;
}

}  // namespace mvie

namespace mvie {

Vector solve_linear(const Matrix& a, std::span<const double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorCode::kNonSquare, "solve_linear");
  if (b.size() != n) throw Error(ErrorCode::kDimMismatch, "solve_linear");
  Matrix m = a;
  Vector x(b.begin(), b.end());
  const double scale = std::max(a.frobenius_norm(), std::numeric_limits<double>::min());
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
    if (std::abs(m(piv, k)) <= 1e-14 * scale) throw Error(ErrorCode::kBadRank, "singular system");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      std::swap(x[k], x[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m(i, k) / m(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
      x[i] -= f * x[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = x[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= m(k, j) * x[j];
    x[k] = s / m(k, k);
  }
  return x;
}

Vector nnls(const Matrix& a, std::span<const double> b) {
  const std::size_t n = a.cols();
  if (a.rows() != b.size()) throw Error(ErrorCode::kDimMismatch, "nnls");
  const Matrix gram = a.transpose() * a;
  const Vector atb = transpose_times(a, b);
  const double tol = 1e-12 * std::max(1.0, norm(atb));

  Vector x(n, 0.0);
  std::vector<bool> passive(n, false);
  auto gradient = [&] {
    Vector w = atb;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w[i] -= gram(i, j) * x[j];
    return w;
  };
  auto solve_passive = [&] {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (passive[i]) idx.push_back(i);
    Matrix g(idx.size(), idx.size());
    Vector rhs(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      rhs[r] = atb[idx[r]];
      for (std::size_t c = 0; c < idx.size(); ++c) g(r, c) = gram(idx[r], idx[c]);
    }
    const Vector sol = solve_linear(g, rhs);
    Vector z(n, 0.0);
    for (std::size_t r = 0; r < idx.size(); ++r) z[idx[r]] = sol[r];
    return z;
  };

  const std::size_t max_outer = 3 * n + 10;
  for (std::size_t outer = 0; outer < max_outer; ++outer) {
    const Vector w = gradient();
    std::size_t pick = n;
    double best = tol;
    for (std::size_t i = 0; i < n; ++i) {
      if (!passive[i] && w[i] > best) {
        best = w[i];
        pick = i;
      }
    }
    if (pick == n) break;
    passive[pick] = true;
    for (std::size_t inner = 0; inner <= n; ++inner) {
      Vector z;
      try {
        z = solve_passive();
      } catch (const Error&) {
        // Column dependent on the passive set; it cannot improve the fit.
        passive[pick] = false;
        break;
      }
      bool feasible = true;
      for (std::size_t i = 0; i < n; ++i)
        if (passive[i] && z[i] <= 0.0) feasible = false;
      if (feasible) {
        x = std::move(z);
        break;
      }
      double step = 1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (passive[i] && z[i] <= 0.0) step = std::min(step, x[i] / (x[i] - z[i]));
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += step * (z[i] - x[i]);
        if (passive[i] && x[i] <= 1e-15) {
          passive[i] = false;
          x[i] = 0.0;
        }
      }
    }
  }
  return x;
}

}  // namespace mvie
