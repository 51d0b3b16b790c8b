#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvie/dimred.hpp"
#include "mvie/error.hpp"
#include "mvie/hull.hpp"
#include "mvie/mvie.hpp"
#include "mvie/recovery.hpp"

namespace mvie {

struct PipelineConfig {
  FpgmConfig fpgm;
  bool high_accuracy = false;
  HighAccuracyConfig high_accuracy_cfg;
  /// Relative slack below which a facet counts as touching the ellipsoid.
  double contact_tau = 1e-5;
  std::uint64_t seed = 0;
  bool estimate_abundances = false;
  /// Externally computed facets of the reduced hull; skips enumeration.
  std::optional<HPolytope> facets;
};

struct RecoveryReport {
  Matrix A_hat;
  std::vector<Vector> contacts_reduced;
  std::vector<Vector> contacts_ambient;
  std::size_t raw_contact_count = 0;
  std::vector<double> contact_slacks;
  std::optional<Matrix> S_hat;

  AffineChart chart;
  double fit_residual = 0.0;
  bool model_mismatch = false;
  std::size_t facet_count = 0;
  Ellipsoid reduced_ellipsoid;
  SolveDiagnostics solver;
  /// Seconds per stage: dimred, hull, solve, recover, total.
  std::map<std::string, double> timings;
};

/// Error raised inside one pipeline stage, labelled with that stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "[" + stage + "] " + std::string(to_string(cause.code())) + ": " + cause.detail(),
              cause.detail()),
        stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Blind recovery of A from X = A·S: affine fit to N−1 dimensions, facet
/// enumeration, MVIE solve, contact extraction and reconstruction.
RecoveryReport run_recovery(const Matrix& X, std::size_t N, const PipelineConfig& cfg = {});

}  // namespace mvie
