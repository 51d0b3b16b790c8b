#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>

#include "mvie/dimred.hpp"
#include "mvie/error.hpp"
#include "mvie/hull.hpp"
#include "mvie/metrics.hpp"
#include "mvie/mvie.hpp"
#include "mvie/pipeline.hpp"
#include "mvie/synth.hpp"

namespace py = pybind11;
using mvie::Matrix;
using mvie::Vector;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  const auto* p = a.data();
  return Matrix(a.shape(0), a.shape(1), std::vector<double>(p, p + a.size()));
}

Vector to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return Vector(a.data(), a.data() + a.size());
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Array to_array(const Vector& v) {
  Array out(v.size());
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

mvie::HPolytope to_polytope(const Array& G, const Array& h) {
  const Matrix g = to_matrix(G);
  const Vector off = to_vector(h);
  if (off.size() != g.rows()) throw py::value_error("G and h disagree on the number of facets");
  mvie::HPolytope poly{g.cols(), {}};
  for (std::size_t i = 0; i < g.rows(); ++i) {
    const auto row = g.row(i);
    poly.facets.push_back({Vector(row.begin(), row.end()), off[i]});
  }
  return poly;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Blind endmember recovery by maximum-volume inscribed ellipsoids";
  py::register_exception<mvie::Error>(m, "MvieError", PyExc_RuntimeError);

  m.def(
      "generate_instance",
      [](std::size_t M, std::size_t N, std::size_t L, double purity, double snr_db, std::uint64_t seed) {
        const auto gt = mvie::generate_instance({M, N, L, purity, snr_db, seed});
        py::dict out;
        out["A"] = to_array(gt.A);
        out["S"] = to_array(gt.S);
        out["X"] = to_array(gt.X);
        return out;
      },
      py::arg("M"), py::arg("N"), py::arg("L"), py::arg("purity") = 1.0,
      py::arg("snr_db") = std::numeric_limits<double>::infinity(), py::arg("seed") = 0,
      "Synthetic X = A S (+ noise); returns a dict with A, S and X.");

  m.def(
      "affine_fit",
      [](const Array& X, std::size_t N) {
        const auto fit = mvie::affine_fit(to_matrix(X), N);
        py::dict out;
        out["phi"] = to_array(fit.chart.phi);
        out["b"] = to_array(fit.chart.b);
        out["residual"] = fit.residual;
        out["model_mismatch"] = fit.model_mismatch;
        return out;
      },
      py::arg("X"), py::arg("N"));

  m.def(
      "reduce_points",
      [](const Array& X, const Array& phi, const Array& b) {
        return to_array(mvie::reduce_points(to_matrix(X), {to_matrix(phi), to_vector(b)}));
      },
      py::arg("X"), py::arg("phi"), py::arg("b"));

  m.def(
      "enumerate_facets",
      [](const Array& points) {
        const auto poly = mvie::enumerate_facets(to_matrix(points));
        Matrix G(poly.size(), poly.dim);
        Vector h(poly.size());
        for (std::size_t i = 0; i < poly.size(); ++i) {
          std::copy(poly.facets[i].normal.begin(), poly.facets[i].normal.end(), G.row(i).begin());
          h[i] = poly.facets[i].offset;
        }
        return py::make_tuple(to_array(G), to_array(h));
      },
      py::arg("points"), "Facets {x : G x <= h} of the convex hull of the columns of `points`.");

  m.def(
      "solve_mvie",
      [](const Array& G, const Array& h, bool high_accuracy) {
        const auto poly = to_polytope(G, h);
        const auto sol = high_accuracy ? mvie::solve_mvie_high_accuracy(poly) : mvie::solve_mvie(poly);
        return py::make_tuple(to_array(sol.ellipsoid.F), to_array(sol.ellipsoid.c));
      },
      py::arg("G"), py::arg("h"), py::arg("high_accuracy") = true,
      "Maximum-volume ellipsoid {F u + c : |u| <= 1} inside {x : G x <= h}.");

  m.def(
      "run_recovery",
      [](const Array& X, std::size_t N, bool high_accuracy, bool abundances, std::uint64_t seed) {
        mvie::PipelineConfig cfg;
        cfg.high_accuracy = high_accuracy;
        cfg.estimate_abundances = abundances;
        cfg.seed = seed;
        const auto rep = mvie::run_recovery(to_matrix(X), N, cfg);
        py::dict out;
        out["A_hat"] = to_array(rep.A_hat);
        out["S_hat"] = rep.S_hat ? py::object(to_array(*rep.S_hat)) : py::none();
        out["F"] = to_array(rep.reduced_ellipsoid.F);
        out["c"] = to_array(rep.reduced_ellipsoid.c);
        out["facet_count"] = rep.facet_count;
        out["model_mismatch"] = rep.model_mismatch;
        out["timings"] = rep.timings;
        return out;
      },
      py::arg("X"), py::arg("N"), py::arg("high_accuracy") = false, py::arg("abundances") = false,
      py::arg("seed") = 0);

  m.def(
      "rms_angle_error",
      [](const Array& A, const Array& A_hat) {
        const auto e = mvie::rms_angle_error(to_matrix(A), to_matrix(A_hat));
        return py::make_tuple(e.phi_deg, e.permutation);
      },
      py::arg("A"), py::arg("A_hat"), "RMS angle (degrees) after the best column matching, and that matching.");
}
