#include "mvie/pipeline.hpp"

#include <chrono>

#include "mvie/metrics.hpp"

namespace mvie {

namespace {

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

}  // namespace

RecoveryReport run_recovery(const Matrix& X, std::size_t N, const PipelineConfig& cfg) {
  const auto begin = StageTimer::Clock::now();
  StageTimer timer;
  RecoveryReport report;

  timer.start("dimred");
  const Matrix reduced = in_stage("dimred", [&] {
    AffineFit fit = affine_fit(X, N);
    report.chart = std::move(fit.chart);
    report.fit_residual = fit.residual;
    report.model_mismatch = fit.model_mismatch;
    return reduce_points(X, report.chart);
  });

  timer.start("hull");
  Vector vertex_centroid;
  const HPolytope poly = in_stage("hull", [&] {
    if (cfg.facets) {
      if (cfg.facets->dim != N - 1) throw Error(ErrorCode::kDimMismatch, "imported facets have wrong dimension");
      return *cfg.facets;
    }
    ConvexHull hull = convex_hull(reduced);
    vertex_centroid.assign(N - 1, 0.0);
    for (std::size_t v : hull.vertices) {
      for (std::size_t k = 0; k < N - 1; ++k) vertex_centroid[k] += reduced(k, v);
    }
    for (double& x : vertex_centroid) x /= static_cast<double>(hull.vertices.size());
    return std::move(hull.polytope);
  });
  report.facet_count = poly.size();

  timer.start("solve");
  MvieSolution sol = in_stage("solve", [&] {
    std::optional<Vector> hint;
    if (!vertex_centroid.empty()) hint = vertex_centroid;
    MvieStart start = default_start(poly, hint);
    return cfg.high_accuracy
               ? solve_mvie_high_accuracy(poly, cfg.fpgm, cfg.high_accuracy_cfg, std::move(start))
               : solve_mvie(poly, cfg.fpgm, std::move(start));
  });
  report.reduced_ellipsoid = sol.ellipsoid;
  report.solver = std::move(sol.diagnostics);

  timer.start("recover");
  in_stage("recover", [&] {
    ContactCandidates cand = find_contacts(report.reduced_ellipsoid, poly, cfg.contact_tau);
    report.raw_contact_count = cand.points.size();
    report.contact_slacks = std::move(cand.slacks);
    report.contacts_reduced = consolidate_contacts(cand.points, N, cfg.seed);
    for (const auto& q : report.contacts_reduced) report.contacts_ambient.push_back(lift_point(q, report.chart));
    report.A_hat = reconstruct_endmembers(report.contacts_ambient);
    if (cfg.estimate_abundances) report.S_hat = recover_abundances(X, report.A_hat);
    return 0;
  });
  timer.stop();

  report.timings = timer.stages();
  report.timings["total"] = std::chrono::duration<double>(StageTimer::Clock::now() - begin).count();
  return report;
}

}  // namespace mvie
