#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mvie/dimred.hpp"
#include "mvie/hull.hpp"
#include "mvie/metrics.hpp"
#include "mvie/mvie.hpp"
#include "mvie/pipeline.hpp"
#include "mvie/recovery.hpp"
#include "mvie/synth.hpp"
#include "support.hpp"

using namespace mvie;
using oracle::TestRng;

namespace {

PipelineConfig accurate() {
  PipelineConfig cfg;
  cfg.high_accuracy = true;
  return cfg;
}

}  // namespace

TEST_CASE("noiseless recovery above the purity threshold") {
  for (std::size_t N : {3, 4, 5}) {
    const double r = 1.0 / std::sqrt(double(N - 1)) + 0.05;
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
      const GroundTruth gt = generate_instance({40, N, N == 5 ? std::size_t{500} : std::size_t{800}, r, INFINITY, 100 * N + seed});
      const RecoveryReport rep = run_recovery(gt.X, N, accurate());
      CHECK(rms_angle_error(gt.A, rep.A_hat).phi_deg <= 0.05);
      CHECK(rep.A_hat.cols() == N);
      CHECK(rep.contacts_reduced.size() == N);
      CHECK_FALSE(rep.model_mismatch);
    }
  }
}

TEST_CASE("contact candidates form N tight clusters") {
  for (std::size_t N : {3, 4}) {
    const GroundTruth gt = generate_instance({40, N, 800, 1.0 / std::sqrt(double(N - 1)) + 0.1, INFINITY, 7 + N});
    const AffineFit fit = affine_fit(gt.X, N);
    const HPolytope poly = enumerate_facets(reduce_points(gt.X, fit.chart));
    const MvieSolution sol = solve_mvie_high_accuracy(poly);
    const ContactCandidates cands = find_contacts(sol.ellipsoid, poly, 1e-5);
    const KMeansResult km = kmeans(cands.points, N, 0);
    double spread = 0.0;
    for (std::size_t i = 0; i < cands.points.size(); ++i)
      spread = std::max(spread, oracle::distance(cands.points[i], km.centroids[km.labels[i]]));
    double gap = INFINITY;
    for (std::size_t a = 0; a < N; ++a)
      for (std::size_t b = a + 1; b < N; ++b) gap = std::min(gap, oracle::distance(km.centroids[a], km.centroids[b]));
    CHECK(gap > 10.0 * spread);
    // Every cluster is populated.
    for (std::size_t k = 0; k < N; ++k) CHECK(std::count(km.labels.begin(), km.labels.end(), k) >= 1);
  }
}

TEST_CASE("lifting preserves volume and containment") {
  TestRng rng(71);
  const GroundTruth gt = generate_instance({30, 4, 300, 0.9, INFINITY, 5});
  const AffineFit fit = affine_fit(gt.X, 4);
  const Matrix& phi = fit.chart.phi;
  const HPolytope poly = enumerate_facets(reduce_points(gt.X, fit.chart));
  const MvieSolution sol = solve_mvie(poly);

  const Matrix F = oracle::naive_multiply(phi, sol.ellipsoid.F);
  const double det_lifted = oracle::cofactor_det([&] {
    const Matrix g = oracle::naive_multiply(F.transpose(), F);
    std::vector<Vector> rows;
    for (std::size_t i = 0; i < g.rows(); ++i) rows.push_back(oracle::column(g.transpose(), i));
    return rows;
  }());
  const double det_reduced = std::exp(sol.ellipsoid.log_det());
  CHECK(det_lifted == doctest::Approx(det_reduced * det_reduced).epsilon(1e-8));

  // Random ellipsoids shrunk until they fit the reduced hull also fit the
  // lifted facets gᵀΦᵀ(x − b) ≤ h, and the two slacks agree.
  for (int trial = 0; trial < 20; ++trial) {
    Matrix Fp = rng.symmetric(3, 0.05);
    for (std::size_t i = 0; i < 3; ++i) Fp(i, i) += 0.1;
    Ellipsoid e{Fp, sol.ellipsoid.c};
    while (max_facet_violation(e, poly) > 0) e.F *= 0.8;
    const Matrix Fl = oracle::naive_multiply(phi, e.F);
    const Vector cl = lift_point(e.c, fit.chart);
    for (const auto& f : poly.facets) {
      const Vector gl = phi * f.normal;
      const Vector flg = transpose_times(Fl, gl);
      Vector centered = cl;
      for (std::size_t i = 0; i < centered.size(); ++i) centered[i] -= fit.chart.b[i];
      const double lifted_slack = f.offset - oracle::naive_norm(flg) - oracle::naive_dot(gl, centered);
      const double reduced_slack = f.offset - oracle::naive_norm(e.F * f.normal) - oracle::naive_dot(f.normal, e.c);
      CHECK(lifted_slack >= -1e-12);
      CHECK(lifted_slack == doctest::Approx(reduced_slack).epsilon(1e-9));
    }
  }
}

TEST_CASE("report contents") {
  const GroundTruth gt = generate_instance({30, 3, 300, 0.85, INFINITY, 3});
  PipelineConfig cfg = accurate();
  cfg.estimate_abundances = true;
  const RecoveryReport rep = run_recovery(gt.X, 3, cfg);
  REQUIRE(rep.S_hat);
  for (std::size_t j = 0; j < rep.S_hat->cols(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK((*rep.S_hat)(i, j) >= 0.0);
      sum += (*rep.S_hat)(i, j);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    const Vector lifted = lift_point(rep.contacts_reduced[k], rep.chart);
    CHECK(oracle::distance(lifted, rep.contacts_ambient[k]) <= 1e-12);
  }
  CHECK(rep.raw_contact_count >= 3);
  CHECK(rep.contact_slacks.size() == rep.raw_contact_count);
  CHECK(rep.facet_count > 3);
  double stage_sum = 0.0;
  for (const char* s : {"dimred", "hull", "solve", "recover"}) stage_sum += rep.timings.at(s);
  CHECK(stage_sum <= rep.timings.at("total") + 1e-6);
}

TEST_CASE("imported facets skip enumeration") {
  const GroundTruth gt = generate_instance({30, 3, 300, 0.85, INFINITY, 4});
  const AffineFit fit = affine_fit(gt.X, 3);
  PipelineConfig cfg = accurate();
  cfg.facets = enumerate_facets(reduce_points(gt.X, fit.chart));
  const RecoveryReport a = run_recovery(gt.X, 3, cfg);
  const RecoveryReport b = run_recovery(gt.X, 3, accurate());
  // Without hull vertices the solver starts elsewhere, so agreement is only
  // to solver accuracy.
  CHECK(rms_angle_error(a.A_hat, b.A_hat).phi_deg <= 1e-3);
  cfg.facets->dim = 5;
  CHECK_THROWS_AS(run_recovery(gt.X, 3, cfg), StageError);
}

TEST_CASE("noisy data still yields an estimate") {
  const GroundTruth gt = generate_instance({30, 3, 300, 0.85, 40.0, 6});
  const RecoveryReport rep = run_recovery(gt.X, 3);
  CHECK(rep.model_mismatch);
  CHECK(rms_angle_error(gt.A, rep.A_hat).phi_deg < 10.0);
}

TEST_CASE("failures carry the stage label") {
  try {
    run_recovery(Matrix(10, 20, 0.5), 3);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "dimred");
    CHECK(e.code() == ErrorCode::kRankDeficientData);
    CHECK(std::string(e.what()).rfind("[dimred] RankDeficientData: ", 0) == 0);
  }
}
