#include "mvie/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "mvie/error.hpp"

namespace mvie {

namespace {

// Hungarian algorithm (potentials form) on a square cost matrix; returns the
// column assigned to each row.
std::vector<std::size_t> hungarian(const Matrix& cost) {
  const std::size_t n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace

double angle_between_deg(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kZeroColumn, "angle with a zero vector");
  const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

AngleError rms_angle_error(const Matrix& A, const Matrix& A_hat) {
  if (A.rows() != A_hat.rows() || A.cols() != A_hat.cols()) {
    throw Error(ErrorCode::kDimMismatch, "A and A_hat shapes differ");
  }
  const std::size_t N = A.cols();
  if (N == 0) throw Error(ErrorCode::kBadDims, "no columns");
  Matrix sq(N, N);
  for (std::size_t i = 0; i < N; ++i) {
    const Vector a = A.col(i);
    for (std::size_t j = 0; j < N; ++j) {
      const double ang = angle_between_deg(a, A_hat.col(j));
      sq(i, j) = ang * ang;
    }
  }

  AngleError out;
  if (N <= 8) {
    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < N; ++i) s += sq(i, perm[i]);
      if (s < best) {
        best = s;
        out.permutation = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.phi_deg = std::sqrt(best / static_cast<double>(N));
    return out;
  }
  out.permutation = hungarian(sq);
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += sq(i, out.permutation[i]);
  out.phi_deg = std::sqrt(s / static_cast<double>(N));
  return out;
}

double snr_of(const Matrix& X_clean, const Matrix& W_noise) {
  if (X_clean.rows() != W_noise.rows() || X_clean.cols() != W_noise.cols()) {
    throw Error(ErrorCode::kDimMismatch, "signal and noise shapes differ");
  }
  const double noise = dot(W_noise.data(), W_noise.data());
  if (noise == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(dot(X_clean.data(), X_clean.data()) / noise);
}

void StageTimer::start(const std::string& stage) {
  if (!current_.empty()) stop();
  current_ = stage;
  since_ = Clock::now();
}

void StageTimer::stop() {
  if (current_.empty()) return;
  stages_[current_] += std::chrono::duration<double>(Clock::now() - since_).count();
  current_.clear();
}

double StageTimer::seconds(const std::string& stage) const {
  const auto it = stages_.find(stage);
  return it == stages_.end() ? 0.0 : it->second;
}

}  // namespace mvie
