#include "mvie/recovery.hpp"

#include <algorithm>
#include <cmath>

#include "mvie/error.hpp"

namespace mvie {

ContactCandidates find_contacts(const Ellipsoid& e, const HPolytope& poly, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be positive");
  if (e.c.size() != poly.dim) throw Error(ErrorCode::kDimMismatch, "ellipsoid and polytope dimensions");
  ContactCandidates out;
  for (std::size_t i = 0; i < poly.facets.size(); ++i) {
    const auto& f = poly.facets[i];
    const Vector fg = e.F * f.normal;
    const double len = norm(fg);
    const double slack = f.offset - (len + dot(f.normal, e.c));
    if (slack > tau * std::max(1.0, std::abs(f.offset)) || len == 0.0) continue;
    Vector dir = fg;
    for (double& x : dir) x /= len;
    Vector q = e.F * dir;
    axpy(1.0, e.c, q);
    out.points.push_back(std::move(q));
    out.facets.push_back(i);
    out.slacks.push_back(slack);
  }
  if (out.points.empty()) {
    throw Error(ErrorCode::kNoContacts, "no facet within tau of the ellipsoid; increase tau");
  }
  return out;
}

std::vector<Vector> consolidate_contacts(const std::vector<Vector>& candidates, std::size_t N,
                                         std::uint64_t seed) {
  if (candidates.size() < N) {
    throw Error(ErrorCode::kTooFewContacts,
                "found " + std::to_string(candidates.size()) + " contact candidates for N = " +
                    std::to_string(N) + "; try a larger contact tolerance");
  }
  if (candidates.size() == N) return candidates;
  return kmeans(candidates, N, seed).centroids;
}

Matrix reconstruct_endmembers(const std::vector<Vector>& contacts) {
  if (contacts.size() < 2) throw Error(ErrorCode::kWrongCount, "need at least two contact points");
  const std::size_t N = contacts.size();
  const std::size_t M = contacts.front().size();
  Vector total(M, 0.0);
  for (const auto& q : contacts) {
    if (q.size() != M) throw Error(ErrorCode::kDimMismatch, "contacts of unequal length");
    axpy(1.0, q, total);
  }
  Matrix A(M, N);
  const double scale = static_cast<double>(N - 1);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t m = 0; m < M; ++m) A(m, i) = total[m] - scale * contacts[i][m];
  return A;
}

double simplex_ls_residual(const Matrix& gram, std::span<const double> atx, std::span<const double> s) {
  Vector grad = gram * s;
  axpy(-1.0, atx, grad);
  // Unit step: s − P(s − ∇) vanishes exactly at the constrained optimum.
  Vector trial(s.begin(), s.end());
  axpy(-1.0, grad, trial);
  const Vector proj = project_simplex(trial);
  return std::sqrt(squared_distance(proj, s));
}

Matrix recover_abundances(const Matrix& X, const Matrix& A_hat, const AbundanceOptions& opts) {
  if (X.rows() != A_hat.rows()) throw Error(ErrorCode::kDimMismatch, "X and A_hat band counts");
  if (!X.all_finite() || !A_hat.all_finite()) throw Error(ErrorCode::kNotFinite, "recover_abundances");
  const std::size_t N = A_hat.cols();
  const std::size_t L = X.cols();
  const Matrix gram = A_hat.transpose() * A_hat;
  const EigSymResult eig = eig_sym(gram);
  const double lmax = eig.eigenvalues.front();
  if (!(eig.eigenvalues.back() > 1e-20 * lmax) || !(lmax > 0.0)) {
    throw Error(ErrorCode::kRankDeficientA, "estimated endmember matrix is rank deficient");
  }
  const double step = 1.0 / lmax;
  const Matrix at = A_hat.transpose();

  Matrix S(N, L);
  for (std::size_t col = 0; col < L; ++col) {
    const Vector x = X.col(col);
    const Vector atx = at * x;
    const double tol = opts.tol * std::max(1.0, norm(atx));
    Vector s(N, 1.0 / static_cast<double>(N));
    Vector z = s;
    double momentum_t = 1.0;
    for (std::size_t it = 0; it < opts.max_iter; ++it) {
      Vector grad = gram * z;
      axpy(-1.0, atx, grad);
      Vector trial = z;
      axpy(-step, grad, trial);
      Vector next = project_simplex(trial);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_t * momentum_t));
      const double coef = (momentum_t - 1.0) / t_next;
      for (std::size_t i = 0; i < N; ++i) z[i] = next[i] + coef * (next[i] - s[i]);
      s = std::move(next);
      momentum_t = t_next;
      if (it % 10 == 9 && simplex_ls_residual(gram, atx, s) <= tol) break;
    }
    S.set_col(col, s);
  }
  return S;
}

}  // namespace mvie
