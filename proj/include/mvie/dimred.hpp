#pragma once

#include <span>

#include "mvie/numerics.hpp"

namespace mvie {

/// Affine chart x = Φ·x′ + b with semi-orthonormal Φ (ΦᵀΦ = I).
struct AffineChart {
  Matrix phi;  // M×(N−1)
  Vector b;    // M

  std::size_t ambient_dim() const { return phi.rows(); }
  std::size_t reduced_dim() const { return phi.cols(); }
};

struct AffineFit {
  AffineChart chart;
  /// max_i ‖(I − ΦΦᵀ)(xᵢ − b)‖
  double residual = 0.0;
  /// max_i ‖xᵢ − b‖, the scale the residual is judged against.
  double spread = 0.0;
  /// Residual exceeds 1e-8·spread; expected for noisy data.
  bool model_mismatch = false;
};

/// Affine set fitting: b is the data mean and Φ holds the N−1 principal left
/// singular vectors of the centered data.
AffineFit affine_fit(const Matrix& X, std::size_t N);

/// x′ᵢ = Φᵀ(xᵢ − b), column by column.
Matrix reduce_points(const Matrix& X, const AffineChart& chart);

/// Φ·q′ + b.
Vector lift_point(std::span<const double> reduced, const AffineChart& chart);

}  // namespace mvie
