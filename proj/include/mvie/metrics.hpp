#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mvie/numerics.hpp"

namespace mvie {

struct AngleError {
  double phi_deg = 0.0;
  /// permutation[i] is the column of Â matched to column i of A.
  std::vector<std::size_t> permutation;
};

/// Angle in degrees between two nonzero vectors.
double angle_between_deg(std::span<const double> a, std::span<const double> b);

/// RMS angle error, minimized over column permutations: exhaustive search
/// for N ≤ 8, Hungarian assignment on squared angles beyond that.
AngleError rms_angle_error(const Matrix& A, const Matrix& A_hat);

/// 10·log10(Σ‖xᵢ‖² / (M·L·σ̂²)) with σ̂² = ‖W‖²/(M·L). +∞ when W = 0.
double snr_of(const Matrix& X_clean, const Matrix& W_noise);

/// Wall-clock seconds per named stage.
class StageTimer {
 public:
  using Clock = std::chrono::steady_clock;

  void start(const std::string& stage);
  void stop();
  double seconds(const std::string& stage) const;
  const std::map<std::string, double>& stages() const { return stages_; }

 private:
  std::map<std::string, double> stages_;
  std::string current_;
  Clock::time_point since_{};
};

struct TrialResult {
  std::size_t N = 0;
  std::size_t M = 0;
  std::size_t L = 0;
  double r = 1.0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  double rms_angle_deg = 0.0;
  std::vector<std::size_t> permutation;
  std::size_t K_facets = 0;
  std::map<std::string, double> runtimes_sec;
};

}  // namespace mvie
