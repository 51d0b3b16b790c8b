#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "mvie/numerics.hpp"

namespace mvie {

/// Half-space gᵀx ≤ h with ‖g‖ = 1.
struct Halfspace {
  Vector normal;
  double offset = 0.0;
};

/// Irredundant H-representation {x : gᵢᵀx ≤ hᵢ, i = 1..K}.
struct HPolytope {
  std::size_t dim = 0;
  std::vector<Halfspace> facets;

  std::size_t size() const { return facets.size(); }
};

/// Facet enumeration output plus the combinatorial data needed to audit it.
struct ConvexHull {
  HPolytope polytope;
  /// Input indices of the vertices spanning each facet, parallel to
  /// polytope.facets. Coplanar pieces merged into one facet contribute all
  /// of their vertices.
  std::vector<std::vector<std::size_t>> facet_vertices;
  /// Sorted input indices of all hull vertices.
  std::vector<std::size_t> vertices;
  /// Coplanarity tolerance used: 1e-9 times the bounding-box diagonal.
  double eps = 0.0;
};

/// Convex hull of the columns of `points` (d×L), built incrementally
/// (beneath–beyond) with facet adjacency and conflict lists; the next point
/// inserted is always the farthest outside point of some facet.
/// Near-duplicate facets (normals within 1e-7 rad, offsets within eps) are
/// merged.
ConvexHull convex_hull(const Matrix& points);

/// Convenience wrapper returning only the H-representation.
HPolytope enumerate_facets(const Matrix& points);

/// True iff gᵢᵀp ≤ hᵢ + slack for every facet.
bool contains(const HPolytope& poly, std::span<const double> p, double slack = 0.0);

/// Largest violation maxᵢ(gᵢᵀp − hᵢ); negative means strictly inside.
double max_violation(const HPolytope& poly, std::span<const double> p);

/// Bounding-box diagonal of the columns of `points`.
double point_cloud_extent(const Matrix& points);

/// Facet dump: one row `g_1,...,g_d,h` per facet, no header.
void write_facets_csv(const HPolytope& poly, const std::filesystem::path& path);
/// Reads a facet dump, rescaling each row so that ‖g‖ = 1.
HPolytope read_facets_csv(const std::filesystem::path& path);

}  // namespace mvie
