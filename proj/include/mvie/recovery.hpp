#pragma once

#include <cstdint>
#include <vector>

#include "mvie/hull.hpp"
#include "mvie/mvie.hpp"
#include "mvie/numerics.hpp"

namespace mvie {

struct ContactCandidates {
  std::vector<Vector> points;        // reduced coordinates
  std::vector<std::size_t> facets;   // facet index each point came from
  std::vector<double> slacks;        // hᵢ − (‖F gᵢ‖ + gᵢᵀc), may be negative
};

/// Tangency points q′ = F(F gᵢ/‖F gᵢ‖) + c of every facet whose slack is at
/// most tau·max(1, |hᵢ|).
ContactCandidates find_contacts(const Ellipsoid& e, const HPolytope& poly, double tau);

/// Reduces candidates to exactly N points: returned unchanged when there are
/// N of them, otherwise the centroids of k-means with k = N.
std::vector<Vector> consolidate_contacts(const std::vector<Vector>& candidates, std::size_t N,
                                         std::uint64_t seed);

/// aᵢ = Σⱼ qⱼ − (N−1)·qᵢ for N contact points, returned as columns.
Matrix reconstruct_endmembers(const std::vector<Vector>& contacts);

struct AbundanceOptions {
  std::size_t max_iter = 5000;
  double tol = 1e-9;
};

/// Column-wise min ‖xᵢ − Â sᵢ‖² over the unit simplex by accelerated
/// projected gradient with step 1/λ_max(ÂᵀÂ).
Matrix recover_abundances(const Matrix& X, const Matrix& A_hat, const AbundanceOptions& opts = {});

/// Projected-gradient optimality residual of s for min ½‖x − A s‖² over the
/// simplex, scaled by the step so that it has gradient units.
double simplex_ls_residual(const Matrix& gram, std::span<const double> atx, std::span<const double> s);

}  // namespace mvie
