#include "mvie/dimred.hpp"

#include <algorithm>
#include <cmath>

#include "mvie/error.hpp"

namespace mvie {

AffineFit affine_fit(const Matrix& X, std::size_t N) {
  const std::size_t M = X.rows();
  const std::size_t L = X.cols();
  if (N < 2) throw Error(ErrorCode::kBadDims, "affine_fit needs N >= 2");
  if (L < N || M < N - 1) throw Error(ErrorCode::kBadDims, "affine_fit needs L >= N and M >= N-1");
  if (!X.all_finite()) throw Error(ErrorCode::kNotFinite, "affine_fit");

  Vector b(M, 0.0);
  for (std::size_t m = 0; m < M; ++m) {
    const auto row = X.row(m);
    double s = 0.0;
    for (double x : row) s += x;
    b[m] = s / static_cast<double>(L);
  }
  Matrix centered = X;
  for (std::size_t m = 0; m < M; ++m)
    for (double& x : centered.row(m)) x -= b[m];

  const std::size_t k = N - 1;
  const SvdResult svd = svd_thin(centered, k);
  // The second test catches data whose centered spread is only rounding noise.
  if (!(svd.sigma.back() >= 1e-10 * svd.sigma.front()) || svd.sigma.front() <= 1e-12 * X.frobenius_norm()) {
    throw Error(ErrorCode::kRankDeficientData,
                "centered data spans fewer than N-1 dimensions");
  }

  AffineFit fit;
  fit.chart.phi = svd.u;
  fit.chart.b = std::move(b);
  for (std::size_t i = 0; i < L; ++i) {
    const Vector d = centered.col(i);
    const Vector coords = transpose_times(fit.chart.phi, d);
    const Vector back = fit.chart.phi * coords;
    fit.residual = std::max(fit.residual, std::sqrt(squared_distance(d, back)));
    fit.spread = std::max(fit.spread, norm(d));
  }
  fit.model_mismatch = fit.residual > 1e-8 * fit.spread;
  return fit;
}

Matrix reduce_points(const Matrix& X, const AffineChart& chart) {
  if (X.rows() != chart.ambient_dim()) throw Error(ErrorCode::kDimMismatch, "reduce_points");
  const std::size_t L = X.cols();
  const std::size_t d = chart.reduced_dim();
  Matrix out(d, L, 0.0);
  for (std::size_t m = 0; m < X.rows(); ++m) {
    const auto xrow = X.row(m);
    const auto prow = chart.phi.row(m);
    for (std::size_t j = 0; j < d; ++j) {
      const double p = prow[j];
      auto orow = out.row(j);
      for (std::size_t i = 0; i < L; ++i) orow[i] += p * (xrow[i] - chart.b[m]);
    }
  }
  return out;
}

Vector lift_point(std::span<const double> reduced, const AffineChart& chart) {
  if (reduced.size() != chart.reduced_dim()) throw Error(ErrorCode::kDimMismatch, "lift_point");
  Vector out = chart.phi * reduced;
  axpy(1.0, chart.b, out);
  return out;
}

}  // namespace mvie
