#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "mvie/numerics.hpp"

namespace oracle {

using mvie::Matrix;
using mvie::Vector;

inline constexpr double kPi = 3.14159265358979323846;

/// Test-side randomness, deliberately a different generator from the library.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }
  Vector normal_vector(std::size_t n) {
    Vector v(n);
    for (auto& x : v) x = normal();
    return v;
  }
  Vector unit_vector(std::size_t n) {
    Vector v = normal_vector(n);
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    for (auto& x : v) x /= s;
    return v;
  }
  Matrix gaussian(std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (auto& x : m.data()) x = normal();
    return m;
  }
  Matrix symmetric(std::size_t n, double scale = 1.0) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = scale * normal();
    return m;
  }
  /// Uniform point on the unit simplex (flat Dirichlet via sorted uniforms).
  Vector simplex_point(std::size_t n) {
    Vector cuts{0.0, 1.0};
    for (std::size_t i = 0; i + 1 < n; ++i) cuts.push_back(uniform());
    std::sort(cuts.begin(), cuts.end());
    Vector s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = cuts[i + 1] - cuts[i];
    return s;
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline double naive_dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double naive_norm(const Vector& a) { return std::sqrt(naive_dot(a, a)); }

inline Vector column(const Matrix& m, std::size_t c) {
  Vector v(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) v[r] = m(r, c);
  return v;
}

inline Matrix naive_multiply(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

/// Determinant by cofactor expansion; fine for the n ≤ 5 used here.
inline double cofactor_det(const std::vector<Vector>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  double det = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<Vector> minor;
    for (std::size_t r = 1; r < n; ++r) {
      Vector row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(m[r][k]);
      minor.push_back(row);
    }
    det += ((c % 2 == 0) ? 1.0 : -1.0) * m[0][c] * cofactor_det(minor);
  }
  return det;
}

/// Eigenvalues (descending) of a symmetric n ≤ 3 matrix: roots of
/// det(A − λI) located by a sign-change scan over the Gershgorin interval and
/// refined by bisection. Returns fewer than n values if roots coincide.
inline Vector charpoly_eigenvalues(const Matrix& a) {
  const std::size_t n = a.rows();
  auto p = [&](double lambda) {
    std::vector<Vector> m(n, Vector(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] = a(i, j) - (i == j ? lambda : 0.0);
    return cofactor_det(m);
  };
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) radius += std::abs(a(i, j));
    lo = std::min(lo, a(i, i) - radius);
    hi = std::max(hi, a(i, i) + radius);
  }
  lo -= 1.0;
  hi += 1.0;
  const int steps = 200000;
  Vector roots;
  double x0 = hi, p0 = p(x0);
  for (int k = 1; k <= steps && roots.size() < n; ++k) {
    const double x1 = hi - (hi - lo) * k / steps;
    const double p1 = p(x1);
    if (p0 == 0.0) {
      roots.push_back(x0);
    } else if ((p0 < 0) != (p1 < 0)) {
      double a0 = x1, b0 = x0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a0 + b0);
        if ((p(mid) < 0) == (p(a0) < 0)) a0 = mid;
        else b0 = mid;
      }
      roots.push_back(0.5 * (a0 + b0));
    }
    x0 = x1;
    p0 = p1;
  }
  return roots;
}

/// Minimizer of ½(λ − d)² − κ·ln d over d ≥ eps by nested grid search:
/// 10⁵ points over [eps, λ + 4√κ + 1], then repeated 10³-point zooms.
inline double prox_scalar_grid(double lambda, double kappa, double eps) {
  auto obj = [&](double d) { return 0.5 * (lambda - d) * (lambda - d) - kappa * std::log(d); };
  double lo = eps, hi = std::max(lambda, 0.0) + 4.0 * std::sqrt(kappa) + 1.0;
  int points = 100000;
  double best = lo;
  for (int level = 0; level < 6; ++level) {
    const double step = (hi - lo) / points;
    double best_val = INFINITY;
    for (int i = 0; i <= points; ++i) {
      const double d = lo + step * i;
      const double v = obj(d);
      if (v < best_val) {
        best_val = v;
        best = d;
      }
    }
    lo = std::max(eps, best - 2 * step);
    hi = best + 2 * step;
    points = 1000;
  }
  return best;
}

/// One-sided Huber written out from its piecewise definition.
inline double huber_ref(double z) {
  if (z < 0) return 0.0;
  if (z <= 1) return 0.5 * z * z;
  return z - 0.5;
}

/// Andrew's monotone chain; returns hull vertices counter-clockwise without
/// collinear points.
inline std::vector<std::pair<double, double>> monotone_chain(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const auto& o, const auto& a, const auto& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<double, double>> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Outward unit normal and offset for each edge of a counter-clockwise polygon.
inline std::vector<std::pair<Vector, double>> polygon_halfspaces(
    const std::vector<std::pair<double, double>>& ccw) {
  std::vector<std::pair<Vector, double>> out;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const auto& a = ccw[i];
    const auto& b = ccw[(i + 1) % ccw.size()];
    Vector n{b.second - a.second, a.first - b.first};
    const double len = naive_norm(n);
    n[0] /= len;
    n[1] /= len;
    out.push_back({n, n[0] * a.first + n[1] * a.second});
  }
  return out;
}

/// Brute-force facet hyperplanes of conv(points) in R^d: every d-subset whose
/// hyperplane leaves all points on one side. Duplicates (from coplanar
/// subsets) are merged. Exponential; only for small point sets.
inline std::vector<std::pair<Vector, double>> brute_force_facets(const std::vector<Vector>& pts, double tol) {
  const std::size_t d = pts[0].size();
  const std::size_t n = pts.size();
  std::vector<std::pair<Vector, double>> facets;
  std::vector<std::size_t> idx(d);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
    if (depth == d) {
      // Normal = generalized cross product of the d−1 edge vectors.
      std::vector<Vector> edges;
      for (std::size_t k = 1; k < d; ++k) {
        Vector e(d);
        for (std::size_t j = 0; j < d; ++j) e[j] = pts[idx[k]][j] - pts[idx[0]][j];
        edges.push_back(e);
      }
      Vector normal(d);
      for (std::size_t j = 0; j < d; ++j) {
        std::vector<Vector> minor;
        for (const auto& e : edges) {
          Vector row;
          for (std::size_t c = 0; c < d; ++c)
            if (c != j) row.push_back(e[c]);
          minor.push_back(row);
        }
        normal[j] = ((j % 2 == 0) ? 1.0 : -1.0) * (d == 1 ? 1.0 : cofactor_det(minor));
      }
      const double len = naive_norm(normal);
      if (len < 1e-12) return;
      for (auto& x : normal) x /= len;
      double h = naive_dot(normal, pts[idx[0]]);
      bool any_above = false, any_below = false;
      for (const auto& p : pts) {
        const double s = naive_dot(normal, p) - h;
        if (s > tol) any_above = true;
        if (s < -tol) any_below = true;
      }
      if (any_above && any_below) return;
      if (any_above) {
        for (auto& x : normal) x = -x;
        h = -h;
      }
      for (const auto& [g, off] : facets) {
        double diff = std::abs(off - h);
        for (std::size_t j = 0; j < d; ++j) diff = std::max(diff, std::abs(g[j] - normal[j]));
        if (diff < 1e-7) return;
      }
      facets.push_back({normal, h});
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return facets;
}

/// Indices of points lying on at least d of the given facet hyperplanes.
inline std::set<std::size_t> vertices_from_facets(const std::vector<Vector>& pts,
                                                  const std::vector<std::pair<Vector, double>>& facets,
                                                  double tol) {
  std::set<std::size_t> out;
  const std::size_t d = pts[0].size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::size_t on = 0;
    for (const auto& [g, h] : facets)
      if (std::abs(naive_dot(g, pts[i]) - h) <= tol) ++on;
    if (on >= d) out.insert(i);
  }
  return out;
}

/// RMS angle error by exhaustive search over every permutation.
inline double brute_force_rms_deg(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.cols();
  std::vector<std::vector<double>> sq(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Vector u = column(a, i), v = column(b, j);
      const double c = std::clamp(naive_dot(u, v) / (naive_norm(u) * naive_norm(v)), -1.0, 1.0);
      const double ang = std::acos(c) * 180.0 / kPi;
      sq[i][j] = ang * ang;
    }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += sq[i][perm[i]];
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / n);
}

/// N×(N−1) matrix C with orthonormal columns and Cᵀ1 = 0, built by
/// Gram–Schmidt on eᵢ − e_N.
inline Matrix centered_basis(std::size_t N) {
  std::vector<Vector> cols;
  for (std::size_t i = 0; i + 1 < N; ++i) {
    Vector v(N, 0.0);
    v[i] = 1.0;
    v[N - 1] = -1.0;
    for (const auto& q : cols) {
      const double p = naive_dot(q, v);
      for (std::size_t k = 0; k < N; ++k) v[k] -= p * q[k];
    }
    const double len = naive_norm(v);
    for (auto& x : v) x /= len;
    cols.push_back(v);
  }
  Matrix c(N, N - 1);
  for (std::size_t j = 0; j + 1 < N; ++j)
    for (std::size_t i = 0; i < N; ++i) c(i, j) = cols[j][i];
  return c;
}

/// Pure-pixel data: the N columns of A followed by `fillers` strictly
/// interior mixtures, so conv(X) is exactly the simplex conv{a₁..a_N}.
struct PurePixelInstance {
  Matrix A;
  Matrix X;
};

inline PurePixelInstance pure_pixel_instance(std::size_t M, std::size_t N, std::size_t fillers,
                                             TestRng& rng) {
  PurePixelInstance inst;
  inst.A = Matrix(M, N);
  for (auto& x : inst.A.data()) x = rng.uniform(0.05, 1.0);
  inst.X = Matrix(M, N + fillers);
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = 0; i < M; ++i) inst.X(i, j) = inst.A(i, j);
  for (std::size_t k = 0; k < fillers; ++k) {
    Vector s = rng.simplex_point(N);
    for (auto& x : s) x = 0.5 * x + 0.5 / N;
    for (std::size_t i = 0; i < M; ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < N; ++j) v += inst.A(i, j) * s[j];
      inst.X(i, N + k) = v;
    }
  }
  return inst;
}

/// qᵢ = (1/(N−1))·Σ_{j≠i} aⱼ.
inline std::vector<Vector> facet_centroids(const Matrix& A) {
  const std::size_t N = A.cols();
  std::vector<Vector> q(N, Vector(A.rows(), 0.0));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      if (j != i)
        for (std::size_t r = 0; r < A.rows(); ++r) q[i][r] += A(r, j) / double(N - 1);
  return q;
}

inline Vector column_mean(const Matrix& A) {
  Vector m(A.rows(), 0.0);
  for (std::size_t j = 0; j < A.cols(); ++j)
    for (std::size_t r = 0; r < A.rows(); ++r) m[r] += A(r, j) / double(A.cols());
  return m;
}

inline double distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace oracle
