#include "mvie/mvie.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvie/error.hpp"

namespace mvie {

namespace {

void check_problem(const Matrix& W, std::span<const double> y, const HPolytope& poly) {
  const std::size_t n = poly.dim;
  if (W.rows() != n || W.cols() != n || y.size() != n) {
    throw Error(ErrorCode::kDimMismatch, "W, y and polytope dimensions differ");
  }
  if (!W.all_finite() || !std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::kNotFinite, "W or y has non-finite entries");
  }
}

double log_det_sym(const Matrix& W) {
  const EigSymResult eig = eig_sym(symmetrize(W));
  double s = 0.0;
  for (double l : eig.eigenvalues) {
    if (!(l > 0.0)) return -std::numeric_limits<double>::infinity();
    s += std::log(l);
  }
  return s;
}

double frob_dot(const Matrix& a, const Matrix& b) { return dot(a.data(), b.data()); }

}  // namespace

double Ellipsoid::log_det() const { return log_det_sym(F); }

void FpgmConfig::validate() const {
  if (!(rho > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rho must be positive");
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  if (!(alpha >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be at least 1");
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorCode::kInvalidArgument, "beta must lie in (0,1)");
  if (!(t_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "t_max must be positive");
  if (!(tol_rel >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "tol_rel must be nonnegative");
  if (max_iter == 0) throw Error(ErrorCode::kInvalidArgument, "max_iter must be positive");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kTolerance: return "tolerance";
    case Termination::kMaxIter: return "max_iter";
    case Termination::kStalled: return "stalled";
  }
  return "unknown";
}

double huber(double z) {
  if (z < 0.0) return 0.0;
  if (z <= 1.0) return 0.5 * z * z;
  return z - 0.5;
}

double huber_prime(double z) {
  if (z < 0.0) return 0.0;
  if (z <= 1.0) return z;
  return 1.0;
}

double penalty_objective(const Matrix& W, std::span<const double> y, const HPolytope& poly,
                         double eps) {
  check_problem(W, y, poly);
  double f = 0.0;
  for (const auto& facet : poly.facets) {
    const Vector wg = W * facet.normal;
    const double root = std::sqrt(dot(wg, wg) + eps);
    f += huber(root + dot(facet.normal, y) - facet.offset);
  }
  return f;
}

ObjectiveGradient objective_and_grad(const Matrix& W, std::span<const double> y,
                                     const HPolytope& poly, double eps) {
  check_problem(W, y, poly);
  if (!W.all_finite()) throw Error(ErrorCode::kNotFinite, "objective_and_grad W");
  const std::size_t n = poly.dim;
  ObjectiveGradient out{0.0, Matrix(n, n), Vector(n, 0.0)};
  for (const auto& facet : poly.facets) {
    const auto& g = facet.normal;
    const Vector wg = W * g;
    const double root = std::sqrt(dot(wg, wg) + eps);
    const double z = root + dot(g, y) - facet.offset;
    out.value += huber(z);
    const double dpsi = huber_prime(z);
    if (dpsi == 0.0) continue;
    const double coef = dpsi / root;
    for (std::size_t r = 0; r < n; ++r) {
      const double a = coef * wg[r];
      auto row = out.grad_w.row(r);
      for (std::size_t c = 0; c < n; ++c) row[c] += a * g[c];
    }
    axpy(dpsi, g, out.grad_y);
  }
  out.grad_w = symmetrize(out.grad_w);
  if (!std::isfinite(out.value)) throw Error(ErrorCode::kNotFinite, "objective value");
  return out;
}

Matrix prox_logdet(const Matrix& V, double t, double rho, double eps) {
  if (!(t > 0.0) || !(rho > 0.0)) throw Error(ErrorCode::kInvalidArgument, "prox needs t, rho > 0");
  if (!V.all_finite()) throw Error(ErrorCode::kNotFinite, "prox_logdet");
  const EigSymResult eig = eig_sym(symmetrize(V));
  const std::size_t n = V.rows();
  const double shift = 4.0 * t / rho;
  Vector d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = eig.eigenvalues[i];
    d[i] = std::max(0.5 * (l + std::sqrt(l * l + shift)), eps);
  }
  // U·diag(d)·Uᵀ, assembled symmetric.
  Matrix out(n, n);
  const Matrix& U = eig.eigenvectors;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = r; c < n; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += U(r, k) * d[k] * U(c, k);
      out(r, c) = s;
      out(c, r) = s;
    }
  }
  return out;
}

double composite_objective(const Matrix& W, std::span<const double> y, const HPolytope& poly,
                           const FpgmConfig& cfg) {
  return penalty_objective(W, y, poly, cfg.eps) - log_det_sym(W) / cfg.rho;
}

MvieStart default_start(const HPolytope& poly, std::optional<Vector> hint) {
  const std::size_t n = poly.dim;
  if (poly.facets.empty() || n == 0) throw Error(ErrorCode::kEmptyInterior, "polytope has no facets");
  Vector y = hint.value_or(Vector(n, 0.0));
  if (y.size() != n) throw Error(ErrorCode::kDimMismatch, "interior hint dimension");

  auto min_slack = [&](std::span<const double> p, std::size_t* arg) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.facets.size(); ++i) {
      const double s = poly.facets[i].offset - dot(poly.facets[i].normal, p);
      if (s < best) {
        best = s;
        if (arg) *arg = i;
      }
    }
    return best;
  };
  double max_slack = 0.0;
  for (const auto& f : poly.facets) max_slack = std::max(max_slack, f.offset - dot(f.normal, y));
  const double step0 = 0.1 * std::max(max_slack, 1e-12);

  // Projected subgradient ascent on the concave min-slack function.
  Vector best_y = y;
  double best = min_slack(y, nullptr);
  constexpr int kSteps = 200;
  for (int k = 0; k < kSteps; ++k) {
    std::size_t arg = 0;
    min_slack(y, &arg);
    axpy(-step0 / std::sqrt(static_cast<double>(k + 1)), poly.facets[arg].normal, y);
    const double s = min_slack(y, nullptr);
    if (s > best) {
      best = s;
      best_y = y;
    }
  }
  if (!(best > 0.0)) throw Error(ErrorCode::kEmptyInterior, "no strictly interior point found");
  Matrix W = Matrix::identity(n);
  W *= 0.9 * best;
  return {std::move(W), std::move(best_y)};
}

MvieSolution solve_mvie(const HPolytope& poly, const FpgmConfig& cfg, std::optional<MvieStart> init) {
  cfg.validate();
  MvieStart start = init ? std::move(*init) : default_start(poly);
  check_problem(start.W, start.y, poly);
  const double inv_rho = 1.0 / cfg.rho;

  Matrix w_prev = prox_logdet(start.W, 1e-300, cfg.rho, cfg.eps);  // symmetrize and floor
  Vector y_prev = start.y;
  Matrix w_ext = w_prev;
  Vector y_ext = y_prev;
  bool extrapolated = false;
  double u_prev = 0.0;
  double t = cfg.t_max;

  SolveDiagnostics diag;
  diag.rho_schedule.push_back(cfg.rho);
  double obj_prev = composite_objective(w_prev, y_prev, poly, cfg);
  if (!std::isfinite(obj_prev)) throw Error(ErrorCode::kDivergence, "initial objective not finite");
  diag.objective_trace.push_back(obj_prev);

  std::size_t streak = 0;
  std::size_t iter = 0;
  constexpr std::size_t kMaxBacktracks = 200;
  while (iter < cfg.max_iter) {
    ++iter;
    const ObjectiveGradient grad = objective_and_grad(w_ext, y_ext, poly, cfg.eps);
    t *= cfg.alpha;

    Matrix w_next;
    Vector y_next;
    double f_next = 0.0;
    std::size_t backtracks = 0;
    for (;;) {
      Matrix step = grad.grad_w;
      step *= -t;
      step += w_ext;
      w_next = prox_logdet(step, t, cfg.rho, cfg.eps);
      y_next = y_ext;
      axpy(-t, grad.grad_y, y_next);
      f_next = penalty_objective(w_next, y_next, poly, cfg.eps);
      const Matrix dw = w_next - w_ext;
      Vector dy = y_next;
      axpy(-1.0, y_ext, dy);
      const double model = grad.value + frob_dot(grad.grad_w, dw) + dot(grad.grad_y, dy) +
                           (frob_dot(dw, dw) + dot(dy, dy)) / (2.0 * t);
      if (!std::isfinite(f_next)) throw Error(ErrorCode::kDivergence, "objective became non-finite");
      if (f_next <= model) break;
      if (++backtracks > kMaxBacktracks) throw Error(ErrorCode::kDivergence, "line search failed");
      t *= cfg.beta;
    }
    diag.backtracks.push_back(backtracks);
    diag.lipschitz_trace.push_back(1.0 / t);

    const double obj = f_next - inv_rho * log_det_sym(w_next);
    if (!std::isfinite(obj)) throw Error(ErrorCode::kDivergence, "composite objective not finite");
    if (obj > obj_prev) {
      if (extrapolated) {
        // Momentum overshot: restart from the last accepted iterate.
        ++diag.restarts;
        w_ext = w_prev;
        y_ext = y_prev;
        extrapolated = false;
        u_prev = 1.0;
        continue;
      }
      // A plain proximal step cannot increase the objective beyond rounding.
      diag.termination = Termination::kStalled;
      break;
    }

    const double u = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * u_prev * u_prev));
    const double momentum = (u_prev - 1.0) / u;
    u_prev = u;
    w_ext = w_next;
    y_ext = y_next;
    if (momentum != 0.0) {
      Matrix dw = w_next - w_prev;
      dw *= momentum;
      w_ext += dw;
      for (std::size_t i = 0; i < y_ext.size(); ++i) y_ext[i] += momentum * (y_next[i] - y_prev[i]);
    }
    extrapolated = momentum != 0.0;
    w_prev = std::move(w_next);
    y_prev = std::move(y_next);
    diag.objective_trace.push_back(obj);

    // The log-det term carries weight 1/rho, so that sets the scale of the
    // objective once the penalty is nearly zero.
    const bool small = std::abs(obj - obj_prev) <= cfg.tol_rel * std::max(inv_rho, std::abs(obj));
    obj_prev = obj;
    streak = small ? streak + 1 : 0;
    if (streak >= cfg.patience) {
      diag.termination = Termination::kTolerance;
      break;
    }
  }

  diag.iterations = diag.objective_trace.size() - 1;
  diag.final_objective = obj_prev;
  return {Ellipsoid{std::move(w_prev), std::move(y_prev)}, std::move(diag)};
}

MvieSolution solve_mvie_high_accuracy(const HPolytope& poly, const FpgmConfig& cfg,
                                      const HighAccuracyConfig& ha, std::optional<MvieStart> init) {
  if (!(ha.rho_growth > 1.0)) throw Error(ErrorCode::kInvalidArgument, "rho_growth must exceed 1");
  FpgmConfig stage = cfg;
  stage.tol_rel = ha.tol_rel;
  MvieSolution sol = solve_mvie(poly, stage, std::move(init));
  std::size_t total = sol.diagnostics.iterations;
  std::vector<double> schedule{stage.rho};
  while (stage.rho < ha.rho_max) {
    stage.rho = std::min(stage.rho * ha.rho_growth, ha.rho_max);
    // The step that suited the previous penalty is a good first guess.
    stage.t_max = std::max(1.0 / sol.diagnostics.lipschitz_trace.back(), 1e-12);
    MvieStart warm{sol.ellipsoid.F, sol.ellipsoid.c};
    sol = solve_mvie(poly, stage, std::move(warm));
    total += sol.diagnostics.iterations;
    schedule.push_back(stage.rho);
  }
  sol.diagnostics.iterations = total;
  sol.diagnostics.rho_schedule = std::move(schedule);
  if (ha.polish) {
    sol.ellipsoid =
        polish_mvie(poly, sol.ellipsoid, ha.polish_mu, ha.polish_mu_start, &sol.diagnostics.polish_steps);
  }
  return sol;
}

namespace {

// Symmetric F is parametrized by its upper triangle; entry k of the basis is
// e_a e_bᵀ + e_b e_aᵀ (or e_a e_aᵀ on the diagonal).
struct SymBasis {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  explicit SymBasis(std::size_t n) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b) pairs.emplace_back(a, b);
  }
  std::size_t size() const { return pairs.size(); }
  // E_k g
  Vector apply(std::size_t k, std::span<const double> g) const {
    Vector v(g.size(), 0.0);
    const auto [a, b] = pairs[k];
    v[a] += g[b];
    if (a != b) v[b] += g[a];
    return v;
  }
};

Matrix inverse_spd(const Matrix& F) {
  const EigSymResult eig = eig_sym(symmetrize(F));
  const std::size_t n = F.rows();
  Matrix G(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        G(a, b) += eig.eigenvectors(a, i) * eig.eigenvectors(b, i) / eig.eigenvalues[i];
  return G;
}

struct BarrierPoint {
  Matrix F;
  Vector c;
};

double barrier_value(const BarrierPoint& x, const HPolytope& poly, double mu) {
  const double ld = log_det_sym(x.F);
  if (!std::isfinite(ld)) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& f : poly.facets) {
    const double slack = f.offset - norm(x.F * f.normal) - dot(f.normal, x.c);
    if (!(slack > 0.0)) return std::numeric_limits<double>::infinity();
    sum += std::log(slack);
  }
  return -ld - mu * sum;
}

// Gradient and Hessian of the barrier objective in (vech F, c) coordinates.
void barrier_derivatives(const BarrierPoint& x, const HPolytope& poly, double mu, const SymBasis& basis,
                         Vector& grad, Matrix& hess) {
  const std::size_t n = x.c.size(), p = basis.size(), m = p + n;
  grad.assign(m, 0.0);
  hess = Matrix(m, m);

  const Matrix G = inverse_spd(x.F);
  for (std::size_t k = 0; k < p; ++k) {
    const auto [a, b] = basis.pairs[k];
    grad[k] = a == b ? -G(a, a) : -2.0 * G(a, b);
    for (std::size_t l = 0; l < p; ++l) {
      // tr(G E_k G E_l), expanded over the one or two unit terms of each.
      const auto [r, s] = basis.pairs[l];
      auto term = [&](std::size_t i, std::size_t j) {
        double t = G(s, i) * G(j, r);
        if (r != s) t += G(r, i) * G(j, s);
        return t;
      };
      hess(k, l) = a == b ? term(a, a) : term(a, b) + term(b, a);
    }
  }

  std::vector<Vector> v(p);
  Vector a(m);
  for (const auto& f : poly.facets) {
    const Vector u = x.F * f.normal;
    const double r = norm(u);
    const double slack = f.offset - r - dot(f.normal, x.c);
    Vector uhat = u;
    for (auto& e : uhat) e /= r;
    for (std::size_t k = 0; k < p; ++k) {
      v[k] = basis.apply(k, f.normal);
      a[k] = dot(uhat, v[k]);
    }
    for (std::size_t i = 0; i < n; ++i) a[p + i] = f.normal[i];
    const double w1 = mu / slack, w2 = mu / (slack * slack);
    for (std::size_t k = 0; k < m; ++k) {
      grad[k] += w1 * a[k];
      for (std::size_t l = 0; l < m; ++l) hess(k, l) += w2 * a[k] * a[l];
    }
    // Curvature of ‖F g‖: (v_kᵀv_l − (ûᵀv_k)(ûᵀv_l)) / ‖F g‖.
    for (std::size_t k = 0; k < p; ++k)
      for (std::size_t l = 0; l < p; ++l) hess(k, l) += w1 * (dot(v[k], v[l]) - a[k] * a[l]) / r;
  }
}

}  // namespace

Ellipsoid polish_mvie(const HPolytope& poly, const Ellipsoid& start, double mu_final, double mu_start,
                      std::size_t* steps) {
  check_problem(start.F, start.c, poly);
  if (!(mu_final > 0.0) || !(mu_start >= mu_final)) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 < mu_final <= mu_start");
  }
  const std::size_t n = poly.dim;

  BarrierPoint x{symmetrize(start.F), start.c};
  double ratio = std::numeric_limits<double>::infinity();
  for (const auto& f : poly.facets) {
    const double room = f.offset - dot(f.normal, x.c);
    if (!(room > 0.0)) throw Error(ErrorCode::kEmptyInterior, "polish start center is not interior");
    ratio = std::min(ratio, room / norm(x.F * f.normal));
  }
  x.F *= std::min(1.0, ratio) * (1.0 - 1e-4);
  if (!std::isfinite(barrier_value(x, poly, 1.0))) throw Error(ErrorCode::kDivergence, "polish start shape is not positive definite");

  const SymBasis basis(n);
  const std::size_t p = basis.size();
  std::size_t taken = 0;
  Vector grad;
  Matrix hess;
  constexpr std::size_t kMaxNewton = 100;
  for (double mu = mu_start;; mu = std::max(0.1 * mu, mu_final)) {
    double value = barrier_value(x, poly, mu);
    // Newton converges quadratically, so one step past this decrement is
    // accurate to rounding.
    const double enough = 1e-12 * (1.0 + std::abs(value));
    for (std::size_t it = 0; it < kMaxNewton; ++it) {
      barrier_derivatives(x, poly, mu, basis, grad, hess);
      // The Hessian is positive definite in exact arithmetic but can be badly
      // conditioned once slacks reach rounding level; drop null directions.
      const EigSymResult eig = eig_sym(symmetrize(hess));
      const double lmax = *std::max_element(eig.eigenvalues.begin(), eig.eigenvalues.end());
      Vector step(grad.size(), 0.0);
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(eig.eigenvalues[i] > 1e-14 * lmax)) continue;
        const Vector v = eig.eigenvectors.col(i);
        axpy(-dot(v, grad) / eig.eigenvalues[i], v, step);
      }
      const double decrement = -dot(grad, step);
      if (!(decrement > 0.0)) break;
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        BarrierPoint trial = x;
        for (std::size_t k = 0; k < p; ++k) {
          const auto [a, b] = basis.pairs[k];
          trial.F(a, b) += t * step[k];
          if (a != b) trial.F(b, a) += t * step[k];
        }
        for (std::size_t i = 0; i < n; ++i) trial.c[i] += t * step[p + i];
        const double v = barrier_value(trial, poly, mu);
        if (v <= value - 0.25 * t * decrement) {
          x = std::move(trial);
          value = v;
          moved = true;
          break;
        }
      }
      if (!moved) break;  // rounding floor
      ++taken;
      if (decrement < enough) break;
    }
    if (mu <= mu_final) break;
  }
  if (steps) *steps = taken;
  return {std::move(x.F), std::move(x.c)};
}

double max_facet_violation(const Ellipsoid& e, const HPolytope& poly) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& f : poly.facets) {
    const Vector fg = e.F * f.normal;
    worst = std::max(worst, norm(fg) + dot(f.normal, e.c) - f.offset);
  }
  return worst;
}

JohnCertificate john_residual(const std::vector<Vector>& ball_points, std::span<const double> weights) {
  if (ball_points.empty()) throw Error(ErrorCode::kTooFewContacts, "no contact points");
  if (weights.size() != ball_points.size()) throw Error(ErrorCode::kDimMismatch, "one weight per contact");
  const std::size_t n = ball_points.front().size();
  Vector center(n, 0.0);
  Matrix shape = Matrix::identity(n);
  shape *= -1.0;
  for (std::size_t i = 0; i < ball_points.size(); ++i) {
    const Vector& u = ball_points[i];
    axpy(weights[i], u, center);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) shape(r, c) += weights[i] * u[r] * u[c];
  }
  JohnCertificate cert;
  cert.center_residual = norm(center);
  cert.shape_residual = shape.frobenius_norm();
  cert.residual = std::hypot(cert.center_residual, cert.shape_residual);
  cert.weights.assign(weights.begin(), weights.end());
  cert.ball_points = ball_points;
  return cert;
}

JohnCertificate check_john(const Ellipsoid& e, const std::vector<Vector>& contacts,
                           std::optional<Vector> weights) {
  const std::size_t n = e.c.size();
  if (e.F.rows() != n || e.F.cols() != n) throw Error(ErrorCode::kDimMismatch, "ellipsoid shape");
  if (contacts.size() < n + 1) throw Error(ErrorCode::kTooFewContacts, "John's conditions need d+1 contacts");
  std::vector<Vector> ball;
  ball.reserve(contacts.size());
  for (const auto& q : contacts) {
    if (q.size() != n) throw Error(ErrorCode::kDimMismatch, "contact dimension");
    Vector rhs = q;
    axpy(-1.0, e.c, rhs);
    ball.push_back(solve_linear(e.F, rhs));
  }
  if (weights) return john_residual(ball, *weights);

  // Stack [uᵢ; vec(uᵢuᵢᵀ)] as columns and fit λ ≥ 0 against [0; vec(I)].
  const std::size_t rows = n + n * n;
  Matrix system(rows, ball.size());
  Vector target(rows, 0.0);
  for (std::size_t r = 0; r < n; ++r) target[n + r * n + r] = 1.0;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const Vector& u = ball[i];
    for (std::size_t r = 0; r < n; ++r) system(r, i) = u[r];
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) system(n + r * n + c, i) = u[r] * u[c];
  }
  const Vector fitted = nnls(system, target);
  return john_residual(ball, fitted);
}

}  // namespace mvie
