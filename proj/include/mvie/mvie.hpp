#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mvie/hull.hpp"
#include "mvie/numerics.hpp"

namespace mvie {

/// E(F, c) = {F·α + c : ‖α‖ ≤ 1}.
struct Ellipsoid {
  Matrix F;
  Vector c;

  /// log det F through the eigenvalues of the symmetric part of F.
  double log_det() const;
};

/// Penalized-MVIE solver settings. Defaults: rho = 150, eps = 2.22e-16,
/// alpha = 2, beta = 0.6.
struct FpgmConfig {
  double rho = 150.0;
  double eps = 2.22e-16;
  double alpha = 2.0;
  double beta = 0.6;
  double t_max = 1.0;
  std::size_t max_iter = 20000;
  double tol_rel = 1e-9;
  /// Consecutive small-change iterations required to stop.
  std::size_t patience = 5;

  void validate() const;
};

/// Settings of the penalty-continuation ("high accuracy") mode.
struct HighAccuracyConfig {
  double rho_growth = 10.0;
  double rho_max = 1e5;
  double tol_rel = 1e-15;
  /// Finish with Newton steps on a log-barrier formulation. The penalized
  /// problem becomes ill-conditioned as rho grows and first-order steps stall
  /// at rounding level, which leaves the center accurate to only ~1e-6.
  bool polish = true;
  /// Final barrier weight; the polished solution is within O(mu) of the
  /// exact maximum-volume ellipsoid.
  double polish_mu = 1e-13;
  /// First barrier weight. The continuation result is already close, so
  /// the barrier path can be joined near its end.
  double polish_mu_start = 1e-4;
};

enum class Termination { kTolerance, kMaxIter, kStalled };
std::string_view to_string(Termination t);

struct SolveDiagnostics {
  std::size_t iterations = 0;
  double final_objective = 0.0;
  /// Composite objective f − (1/ρ)·logdet W of each accepted iterate,
  /// starting with the initial point.
  std::vector<double> objective_trace;
  /// Backtracking steps taken in each iteration.
  std::vector<std::size_t> backtracks;
  /// 1/t after each line search.
  std::vector<double> lipschitz_trace;
  std::size_t restarts = 0;
  /// Newton steps taken by the barrier polish (0 when it did not run).
  std::size_t polish_steps = 0;
  Termination termination = Termination::kMaxIter;
  /// Penalty weights used, in order (one entry unless continuation ran).
  std::vector<double> rho_schedule;
};

struct MvieSolution {
  Ellipsoid ellipsoid;  // F symmetric with λ_min(F) ≥ eps
  SolveDiagnostics diagnostics;
};

struct MvieStart {
  Matrix W;
  Vector y;
};

/// One-sided Huber penalty: 0 for z < 0, z²/2 on [0, 1], z − 1/2 beyond.
double huber(double z);
double huber_prime(double z);

struct ObjectiveGradient {
  double value = 0.0;
  Matrix grad_w;  // symmetrized
  Vector grad_y;
};

/// f(W, y) = Σᵢ ψ(√(‖W gᵢ‖² + ε) + gᵢᵀy − hᵢ).
double penalty_objective(const Matrix& W, std::span<const double> y, const HPolytope& poly,
                         double eps);

/// f together with its analytic gradient; the W-gradient is returned in
/// symmetrized form (G + Gᵀ)/2.
ObjectiveGradient objective_and_grad(const Matrix& W, std::span<const double> y,
                                     const HPolytope& poly, double eps);

/// prox of t·g at V, where g(W) = −(1/ρ)·logdet W restricted to λ_min ≥ eps.
Matrix prox_logdet(const Matrix& V, double t, double rho, double eps);

/// f(W, y) − (1/ρ)·logdet W.
double composite_objective(const Matrix& W, std::span<const double> y, const HPolytope& poly,
                           const FpgmConfig& cfg);

/// Strictly feasible start: y₀ approximately maximizes minᵢ(hᵢ − gᵢᵀy) via
/// 200 subgradient steps from `hint` (origin when absent); W₀ = 0.9·s·I with
/// s the resulting minimum slack.
MvieStart default_start(const HPolytope& poly, std::optional<Vector> hint = std::nullopt);

/// Fast proximal gradient method with backtracking on the penalized
/// problem. Momentum is reset whenever an extrapolated step raises the
/// composite objective, so the recorded trace is non-increasing.
MvieSolution solve_mvie(const HPolytope& poly, const FpgmConfig& cfg = {},
                        std::optional<MvieStart> init = std::nullopt);

/// Penalty continuation: re-solves with ρ multiplied by rho_growth up to
/// rho_max, each stage warm-started and run to tol_rel, then optionally
/// polished by polish_mvie.
MvieSolution solve_mvie_high_accuracy(const HPolytope& poly, const FpgmConfig& cfg = {},
                                      const HighAccuracyConfig& ha = {},
                                      std::optional<MvieStart> init = std::nullopt);

/// Newton's method on −logdet F − μ·Σᵢ log(hᵢ − ‖F gᵢ‖ − gᵢᵀc), with μ
/// decreased tenfold per stage from mu_start down to mu_final. The start is
/// shrunk about its center until strictly feasible; a crude start needs
/// mu_start near 1. Returns the polished ellipsoid and the number of Newton
/// steps through `steps`.
Ellipsoid polish_mvie(const HPolytope& poly, const Ellipsoid& start, double mu_final, double mu_start = 1.0,
                      std::size_t* steps = nullptr);

/// Largest facet violation maxᵢ(‖F gᵢ‖ + gᵢᵀc − hᵢ) of an ellipsoid.
double max_facet_violation(const Ellipsoid& e, const HPolytope& poly);

struct JohnCertificate {
  /// √(‖Σλᵢuᵢ‖² + ‖Σλᵢuᵢuᵢᵀ − I‖²_F)
  double residual = 0.0;
  double center_residual = 0.0;  // ‖Σλᵢuᵢ‖
  double shape_residual = 0.0;   // ‖Σλᵢuᵢuᵢᵀ − I‖_F
  Vector weights;
  /// Contacts mapped to ball coordinates uᵢ = F⁻¹(qᵢ − c).
  std::vector<Vector> ball_points;
};

/// John-condition residual for points u on the unit sphere with the given
/// nonnegative weights.
JohnCertificate john_residual(const std::vector<Vector>& ball_points, std::span<const double> weights);

/// Maps contacts into the ellipsoid's ball coordinates and evaluates John's
/// conditions, fitting λ ≥ 0 by nonnegative least squares when no weights
/// are supplied.
JohnCertificate check_john(const Ellipsoid& e, const std::vector<Vector>& contacts,
                           std::optional<Vector> weights = std::nullopt);

}  // namespace mvie
