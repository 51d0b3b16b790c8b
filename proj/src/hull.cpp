#include "mvie/hull.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "mvie/error.hpp"

namespace mvie {

namespace {

constexpr double kRelEps = 1e-9;
constexpr double kMergeAngle = 1e-7;
constexpr int kNoFacet = -1;

struct Facet {
  std::vector<int> verts;      // d vertices
  std::vector<int> neighbors;  // neighbors[j] shares every vertex but verts[j]
  Vector normal;
  double offset = 0.0;
  std::vector<int> outside;    // conflict list
  int farthest = -1;
  double farthest_dist = 0.0;
  bool alive = true;
  int visit = -1;
};

class Builder {
 public:
  Builder(const Matrix& points, double eps)
      : d_(points.rows()), n_(points.cols()), eps_(eps), pts_(points.transpose()) {}

  ConvexHull run();

 private:
  std::span<const double> point(int i) const { return pts_.row(static_cast<std::size_t>(i)); }
  double distance(const Facet& f, int p) const { return dot(f.normal, point(p)) - f.offset; }

  std::vector<int> initial_simplex() const;
  void set_hyperplane(Facet& f) const;
  void add_to_outside(Facet& f, int p, double dist) const;
  void add_point(int facet_index);
  ConvexHull collect() const;

  std::size_t d_;
  std::size_t n_;
  double eps_;
  Matrix pts_;  // L×d, one point per row
  Vector interior_;
  std::vector<Facet> facets_;
  std::vector<int> pending_;  // facets that may hold outside points
  int visit_stamp_ = 0;
  std::vector<bool> is_vertex_;
};

std::vector<int> Builder::initial_simplex() const {
  // Greedy: start from the point farthest from the centroid, then repeatedly
  // take the point farthest from the affine span of those chosen so far.
  Vector centroid(d_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) axpy(1.0 / static_cast<double>(n_), point(static_cast<int>(i)), centroid);
  std::vector<int> chosen;
  int first = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double dd = squared_distance(point(static_cast<int>(i)), centroid);
    if (dd > best) {
      best = dd;
      first = static_cast<int>(i);
    }
  }
  chosen.push_back(first);
  std::vector<Vector> basis;
  double volume = 1.0;
  const auto origin = point(first);
  for (std::size_t k = 0; k < d_; ++k) {
    int arg = -1;
    double far = -1.0;
    Vector far_residual;
    for (std::size_t i = 0; i < n_; ++i) {
      Vector r(point(static_cast<int>(i)).begin(), point(static_cast<int>(i)).end());
      axpy(-1.0, origin, r);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) axpy(-dot(q, r), q, r);
      const double len = norm(r);
      if (len > far) {
        far = len;
        arg = static_cast<int>(i);
        far_residual = std::move(r);
      }
    }
    if (far <= 0.0) throw Error(ErrorCode::kDegenerateInput, "points do not span the space");
    for (double& x : far_residual) x /= far;
    basis.push_back(std::move(far_residual));
    chosen.push_back(arg);
    volume *= far / static_cast<double>(k + 1);
  }
  const double diam = eps_ / kRelEps;
  if (volume < 1e-12 * std::pow(diam, static_cast<double>(d_))) {
    throw Error(ErrorCode::kDegenerateInput,
                "points do not affinely span R^d; reduce the dimension");
  }
  return chosen;
}

void Builder::set_hyperplane(Facet& f) const {
  // Orthonormal basis of the facet's edge directions, then the component of
  // (v0 − interior) orthogonal to it is the outward normal.
  const auto v0 = point(f.verts[0]);
  std::vector<Vector> basis;
  basis.reserve(d_ - 1);
  for (std::size_t k = 1; k < d_; ++k) {
    Vector e(point(f.verts[k]).begin(), point(f.verts[k]).end());
    axpy(-1.0, v0, e);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) axpy(-dot(q, e), q, e);
    const double len = norm(e);
    if (len == 0.0) throw Error(ErrorCode::kDegenerateInput, "repeated vertex in hull facet");
    for (double& x : e) x /= len;
    basis.push_back(std::move(e));
  }
  Vector nrm(v0.begin(), v0.end());
  axpy(-1.0, interior_, nrm);
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) axpy(-dot(q, nrm), q, nrm);
  const double len = norm(nrm);
  if (len == 0.0) throw Error(ErrorCode::kDegenerateInput, "hull facet passes through interior point");
  for (double& x : nrm) x /= len;
  f.normal = std::move(nrm);
  f.offset = dot(f.normal, v0);
}

void Builder::add_to_outside(Facet& f, int p, double dist) const {
  f.outside.push_back(p);
  if (f.farthest < 0 || dist > f.farthest_dist) {
    f.farthest = p;
    f.farthest_dist = dist;
  }
}

void Builder::add_point(int start) {
  const int apex = facets_[static_cast<std::size_t>(start)].farthest;
  is_vertex_[static_cast<std::size_t>(apex)] = true;
  ++visit_stamp_;

  // Visible region by flood fill from the starting facet.
  std::vector<int> visible{start};
  facets_[static_cast<std::size_t>(start)].visit = visit_stamp_;
  struct Ridge {
    int facet;
    int position;
  };
  std::vector<Ridge> horizon;
  for (std::size_t head = 0; head < visible.size(); ++head) {
    const int fi = visible[head];
    for (std::size_t j = 0; j < d_; ++j) {
      const int nb = facets_[static_cast<std::size_t>(fi)].neighbors[j];
      Facet& nf = facets_[static_cast<std::size_t>(nb)];
      if (nf.visit == visit_stamp_) continue;
      if (distance(nf, apex) > eps_) {
        nf.visit = visit_stamp_;
        visible.push_back(nb);
      } else {
        horizon.push_back({fi, static_cast<int>(j)});
      }
    }
  }
  // A facet reached from two visible facets appears twice in the horizon
  // list; that is correct because it shares a different ridge with each.

  std::map<std::vector<int>, std::pair<int, int>> open_ridges;
  std::vector<int> created;
  created.reserve(horizon.size());
  for (const Ridge& r : horizon) {
    const Facet& vf = facets_[static_cast<std::size_t>(r.facet)];
    Facet nf;
    nf.verts = vf.verts;
    nf.verts[static_cast<std::size_t>(r.position)] = apex;
    nf.neighbors.assign(d_, kNoFacet);
    const int beyond = vf.neighbors[static_cast<std::size_t>(r.position)];
    nf.neighbors[static_cast<std::size_t>(r.position)] = beyond;
    set_hyperplane(nf);
    const int index = static_cast<int>(facets_.size());
    facets_.push_back(std::move(nf));
    Facet& across = facets_[static_cast<std::size_t>(beyond)];
    for (int& back : across.neighbors) {
      if (back == r.facet) {
        back = index;
        break;
      }
    }
    // Ridges containing the apex pair up among the new facets.
    const Facet& created_facet = facets_.back();
    for (std::size_t j = 0; j < d_; ++j) {
      if (static_cast<int>(j) == r.position) continue;
      std::vector<int> key;
      key.reserve(d_ - 1);
      for (std::size_t k = 0; k < d_; ++k)
        if (k != j) key.push_back(created_facet.verts[k]);
      std::sort(key.begin(), key.end());
      auto it = open_ridges.find(key);
      if (it == open_ridges.end()) {
        open_ridges.emplace(std::move(key), std::make_pair(index, static_cast<int>(j)));
      } else {
        facets_[static_cast<std::size_t>(index)].neighbors[j] = it->second.first;
        facets_[static_cast<std::size_t>(it->second.first)]
            .neighbors[static_cast<std::size_t>(it->second.second)] = index;
        open_ridges.erase(it);
      }
    }
    created.push_back(index);
  }
  if (!open_ridges.empty()) {
    throw Error(ErrorCode::kDegenerateInput, "hull horizon is not a closed ridge cycle (near-degenerate input)");
  }

  // Redistribute conflict lists of the removed facets.
  for (int fi : visible) {
    Facet& vf = facets_[static_cast<std::size_t>(fi)];
    vf.alive = false;
    for (int p : vf.outside) {
      if (p == apex) continue;
      for (int ci : created) {
        Facet& cf = facets_[static_cast<std::size_t>(ci)];
        const double dist = distance(cf, p);
        if (dist > eps_) {
          add_to_outside(cf, p, dist);
          break;
        }
      }
    }
    vf.outside.clear();
    vf.outside.shrink_to_fit();
  }
  for (int ci : created)
    if (!facets_[static_cast<std::size_t>(ci)].outside.empty()) pending_.push_back(ci);
}

ConvexHull Builder::run() {
  const std::vector<int> simplex = initial_simplex();
  is_vertex_.assign(n_, false);
  interior_.assign(d_, 0.0);
  for (int v : simplex) {
    is_vertex_[static_cast<std::size_t>(v)] = true;
    axpy(1.0 / static_cast<double>(d_ + 1), point(v), interior_);
  }

  // Facet j omits simplex vertex j; its neighbor opposite vertex v is the
  // facet omitting v.
  for (std::size_t j = 0; j <= d_; ++j) {
    Facet f;
    std::vector<std::size_t> owner;
    for (std::size_t k = 0; k <= d_; ++k) {
      if (k == j) continue;
      f.verts.push_back(simplex[k]);
      owner.push_back(k);
    }
    for (std::size_t k : owner) f.neighbors.push_back(static_cast<int>(k));
    set_hyperplane(f);
    facets_.push_back(std::move(f));
  }

  for (std::size_t i = 0; i < n_; ++i) {
    if (is_vertex_[i]) continue;
    int best = -1;
    double best_dist = eps_;
    for (std::size_t fi = 0; fi < facets_.size(); ++fi) {
      const double dist = distance(facets_[fi], static_cast<int>(i));
      if (dist > best_dist) {
        best_dist = dist;
        best = static_cast<int>(fi);
      }
    }
    if (best >= 0) add_to_outside(facets_[static_cast<std::size_t>(best)], static_cast<int>(i), best_dist);
  }
  for (std::size_t fi = 0; fi < facets_.size(); ++fi)
    if (!facets_[fi].outside.empty()) pending_.push_back(static_cast<int>(fi));

  while (!pending_.empty()) {
    const int fi = pending_.back();
    pending_.pop_back();
    const Facet& f = facets_[static_cast<std::size_t>(fi)];
    if (!f.alive || f.outside.empty()) continue;
    add_point(fi);
  }
  return collect();
}

ConvexHull Builder::collect() const {
  std::vector<int> alive;
  std::vector<int> slot(facets_.size(), -1);
  for (std::size_t i = 0; i < facets_.size(); ++i) {
    if (!facets_[i].alive) continue;
    slot[i] = static_cast<int>(alive.size());
    alive.push_back(static_cast<int>(i));
  }

  // Union coplanar neighbors; a facet of the hull split into several
  // simplicial pieces is connected through such adjacencies.
  std::vector<int> parent(alive.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  const double cos_merge = std::cos(kMergeAngle);
  for (std::size_t a = 0; a < alive.size(); ++a) {
    const Facet& fa = facets_[static_cast<std::size_t>(alive[a])];
    for (int nb : fa.neighbors) {
      const int b = slot[static_cast<std::size_t>(nb)];
      if (b < 0 || static_cast<std::size_t>(b) <= a) continue;
      const Facet& fb = facets_[static_cast<std::size_t>(nb)];
      if (dot(fa.normal, fb.normal) >= cos_merge && std::abs(fa.offset - fb.offset) <= eps_) {
        parent[static_cast<std::size_t>(find(b))] = find(static_cast<int>(a));
      }
    }
  }

  ConvexHull hull;
  hull.eps = eps_;
  hull.polytope.dim = d_;
  std::map<int, std::size_t> group_slot;
  std::vector<std::size_t> group_size;
  for (std::size_t a = 0; a < alive.size(); ++a) {
    const int root = find(static_cast<int>(a));
    const Facet& f = facets_[static_cast<std::size_t>(alive[a])];
    auto [it, inserted] = group_slot.emplace(root, hull.polytope.facets.size());
    if (inserted) {
      hull.polytope.facets.push_back({f.normal, f.offset});
      hull.facet_vertices.emplace_back();
      group_size.push_back(0);
    } else {
      Halfspace& h = hull.polytope.facets[it->second];
      axpy(1.0, f.normal, h.normal);
      h.offset += f.offset;
    }
    ++group_size[it->second];
    for (int v : f.verts) hull.facet_vertices[it->second].push_back(static_cast<std::size_t>(v));
  }
  for (std::size_t g = 0; g < hull.polytope.facets.size(); ++g) {
    Halfspace& h = hull.polytope.facets[g];
    if (group_size[g] > 1) {
      const double len = norm(h.normal);
      for (double& x : h.normal) x /= len;
      h.offset /= len;
      // Offsets must keep every merged vertex on the facet.
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t v : hull.facet_vertices[g]) top = std::max(top, dot(h.normal, pts_.row(v)));
      h.offset = top;
    }
    auto& fv = hull.facet_vertices[g];
    std::sort(fv.begin(), fv.end());
    fv.erase(std::unique(fv.begin(), fv.end()), fv.end());
  }
  for (std::size_t i = 0; i < n_; ++i)
    if (is_vertex_[i]) hull.vertices.push_back(i);
  // Points inserted but later swallowed are not vertices.
  std::vector<bool> on_facet(n_, false);
  for (const auto& fv : hull.facet_vertices)
    for (std::size_t v : fv) on_facet[v] = true;
  std::erase_if(hull.vertices, [&](std::size_t v) { return !on_facet[v]; });
  return hull;
}

ConvexHull hull_1d(const Matrix& points, double eps) {
  const auto row = points.row(0);
  const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
  if (*hi - *lo <= eps) throw Error(ErrorCode::kDegenerateInput, "all points coincide");
  ConvexHull hull;
  hull.eps = eps;
  hull.polytope.dim = 1;
  const auto ilo = static_cast<std::size_t>(lo - row.begin());
  const auto ihi = static_cast<std::size_t>(hi - row.begin());
  hull.polytope.facets.push_back({{1.0}, *hi});
  hull.polytope.facets.push_back({{-1.0}, -*lo});
  hull.facet_vertices = {{ihi}, {ilo}};
  hull.vertices = {std::min(ilo, ihi), std::max(ilo, ihi)};
  return hull;
}

}  // namespace

double point_cloud_extent(const Matrix& points) {
  double sum = 0.0;
  for (std::size_t r = 0; r < points.rows(); ++r) {
    const auto row = points.row(r);
    if (row.empty()) continue;
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    sum += (*hi - *lo) * (*hi - *lo);
  }
  return std::sqrt(sum);
}

ConvexHull convex_hull(const Matrix& points) {
  const std::size_t d = points.rows();
  if (d < 1) throw Error(ErrorCode::kBadDims, "hull dimension must be at least 1");
  if (d > 16) throw Error(ErrorCode::kBadDims, "hull dimension above 16 is unsupported");
  if (points.cols() < d + 1) throw Error(ErrorCode::kTooFewPoints, "need at least d+1 points");
  if (!points.all_finite()) throw Error(ErrorCode::kNotFinite, "convex_hull");
  const double extent = point_cloud_extent(points);
  const double eps = kRelEps * extent;
  if (extent == 0.0) throw Error(ErrorCode::kDegenerateInput, "all points coincide");
  if (d == 1) return hull_1d(points, eps);
  return Builder(points, eps).run();
}

HPolytope enumerate_facets(const Matrix& points) { return convex_hull(points).polytope; }

double max_violation(const HPolytope& poly, std::span<const double> p) {
  if (p.size() != poly.dim) throw Error(ErrorCode::kDimMismatch, "point dimension differs from polytope");
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& f : poly.facets) worst = std::max(worst, dot(f.normal, p) - f.offset);
  return worst;
}

bool contains(const HPolytope& poly, std::span<const double> p, double slack) {
  return max_violation(poly, p) <= slack;
}

void write_facets_csv(const HPolytope& poly, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << std::setprecision(17);
  for (const auto& f : poly.facets) {
    for (double g : f.normal) out << g << ',';
    out << f.offset << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

HPolytope read_facets_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  HPolytope poly;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        values.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kIo, "bad number on facet row " + std::to_string(lineno));
      }
    }
    if (values.size() < 2) throw Error(ErrorCode::kIo, "facet row needs g and h");
    const std::size_t d = values.size() - 1;
    if (poly.dim == 0) poly.dim = d;
    if (d != poly.dim) throw Error(ErrorCode::kIo, "facet rows of unequal width");
    Halfspace h{Vector(values.begin(), values.end() - 1), values.back()};
    const double len = norm(h.normal);
    if (!(len > 0.0) || !std::isfinite(len)) throw Error(ErrorCode::kIo, "facet normal is zero");
    for (double& x : h.normal) x /= len;
    h.offset /= len;
    poly.facets.push_back(std::move(h));
  }
  if (poly.facets.empty()) throw Error(ErrorCode::kIo, "no facets in " + path.string());
  return poly;
}

}  // namespace mvie
