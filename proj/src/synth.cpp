#include "mvie/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "mvie/error.hpp"

namespace mvie {

namespace {

constexpr double kMinAngleDeg = 5.0;
constexpr double kRankTol = 1e-8;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    fields.push_back(field);
  }
  return fields;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kIo, "not a number: '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorCode::kIo, "not a number: '" + s + "'");
  return value;
}

double smallest_singular_value(const Matrix& a) {
  const std::size_t k = std::min(a.rows(), a.cols());
  return svd_thin(a, k).sigma.back();
}

Vector smooth_signature(std::size_t M, Rng& rng) {
  const std::size_t bumps = 5 + rng.below(6);
  Vector v(M, 0.0);
  const double span = static_cast<double>(M);
  for (std::size_t b = 0; b < bumps; ++b) {
    const double center = rng.uniform() * span;
    const double width = span * (0.03 + 0.2 * rng.uniform());
    const double height = 0.2 + 0.8 * rng.uniform();
    for (std::size_t m = 0; m < M; ++m) {
      const double z = (static_cast<double>(m) - center) / width;
      v[m] += height * std::exp(-0.5 * z * z);
    }
  }
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double low = *lo;
  const double range = *hi - *lo;
  for (double& x : v) x = range > 0.0 ? 0.05 + 0.95 * (x - low) / range : 0.5;
  return v;
}

double angle_deg(std::span<const double> a, std::span<const double> b) {
  const double c = std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

}  // namespace

SignatureLibrary load_signature_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open signature library " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kIo, "empty signature library");
  auto header = split_csv_line(line);
  if (header.size() < 2) throw Error(ErrorCode::kIo, "library header needs band plus names");

  SignatureLibrary lib;
  lib.names.assign(header.begin() + 1, header.end());
  std::vector<double> values;
  std::size_t bands = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kIo, "library row " + std::to_string(bands + 2) + " has wrong width");
    }
    for (std::size_t j = 1; j < fields.size(); ++j) {
      const double x = parse_double(fields[j]);
      if (!std::isfinite(x) || x < 0.0) {
        throw Error(ErrorCode::kIo, "library reflectance must be finite and nonnegative");
      }
      values.push_back(x);
    }
    ++bands;
  }
  if (bands == 0) throw Error(ErrorCode::kIo, "library has no bands");
  lib.signatures = Matrix(bands, lib.names.size(), std::move(values));
  return lib;
}

double min_pairwise_angle_deg(const Matrix& a) {
  double best = 180.0;
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      best = std::min(best, angle_deg(a.col(i), a.col(j)));
  return best;
}

Matrix sample_endmembers(std::size_t M, std::size_t N, std::uint64_t seed,
                         const SignatureLibrary* library) {
  if (N == 0 || M == 0 || N > M) throw Error(ErrorCode::kBadDims, "endmembers need 1 <= N <= M");
  Rng rng(seed);

  if (library != nullptr) {
    const Matrix& lib = library->signatures;
    if (lib.rows() != M) throw Error(ErrorCode::kBadDims, "library band count differs from M");
    if (lib.cols() < N) throw Error(ErrorCode::kLibraryTooSmall, "library has fewer than N signatures");
    constexpr int kAttempts = 1000;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
      std::vector<std::size_t> idx(lib.cols());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      for (std::size_t i = 0; i < N; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
      Matrix a(M, N);
      for (std::size_t j = 0; j < N; ++j) a.set_col(j, lib.col(idx[j]));
      // A library of exactly N columns has only one selection up to order.
      const bool forced = lib.cols() == N;
      if (forced || (min_pairwise_angle_deg(a) >= kMinAngleDeg && smallest_singular_value(a) > kRankTol)) {
        return a;
      }
    }
    throw Error(ErrorCode::kLibraryTooSmall, "no well-separated full-rank selection found");
  }

  std::vector<Vector> cols;
  constexpr int kAttempts = 10000;
  int attempts = 0;
  while (cols.size() < N) {
    if (++attempts > kAttempts) throw Error(ErrorCode::kBadDims, "cannot draw separated endmembers");
    Vector candidate = smooth_signature(M, rng);
    const bool separated = std::all_of(cols.begin(), cols.end(), [&](const Vector& c) {
      return angle_deg(c, candidate) >= kMinAngleDeg;
    });
    if (!separated) continue;
    cols.push_back(std::move(candidate));
    if (smallest_singular_value(Matrix::from_columns(cols)) <= kRankTol) cols.pop_back();
  }
  return Matrix::from_columns(cols);
}

Matrix sample_abundances(std::size_t N, std::size_t L, double r, std::uint64_t seed) {
  if (N < 1 || L < 1) throw Error(ErrorCode::kBadDims, "abundances need N, L >= 1");
  if (!(r > 1.0 / std::sqrt(static_cast<double>(N))) || r > 1.0) {
    throw Error(ErrorCode::kInfeasiblePurity,
                "infeasible purity: r must lie in (1/sqrt(N), 1]");
  }
  Rng rng(seed);
  const double shape = 1.0 / static_cast<double>(N);
  Matrix s(N, L);
  Vector draw(N);

  constexpr std::size_t kWindow = 1'000'000;
  std::size_t window_draws = 0;
  std::size_t window_accepts = 0;
  std::size_t filled = 0;
  while (filled < L) {
    double sum = 0.0;
    for (double& x : draw) {
      x = rng.gamma(shape);
      sum += x;
    }
    ++window_draws;
    if (sum > 0.0) {
      for (double& x : draw) x /= sum;
      if (norm(draw) <= r) {
        s.set_col(filled++, draw);
        ++window_accepts;
      }
    }
    if (window_draws == kWindow) {
      if (static_cast<double>(window_accepts) < 1e-4 * static_cast<double>(kWindow)) {
        throw Error(ErrorCode::kRejectionStall, "purity constraint rejects almost every draw");
      }
      window_draws = 0;
      window_accepts = 0;
    }
  }
  return s;
}

GroundTruth assemble_dataset(const Matrix& A, const Matrix& S, double snr_db, std::uint64_t seed) {
  if (A.cols() != S.rows()) throw Error(ErrorCode::kDimMismatch, "A columns must equal S rows");
  if (std::isnan(snr_db)) throw Error(ErrorCode::kInvalidArgument, "snr_db is NaN");
  GroundTruth gt;
  gt.A = A;
  gt.S = S;
  gt.X = A * S;
  gt.noise = Matrix(gt.X.rows(), gt.X.cols());
  gt.snr_db = snr_db;
  gt.seed = seed;
  if (std::isinf(snr_db) && snr_db > 0) return gt;

  const double energy = dot(gt.X.data(), gt.X.data());
  const double count = static_cast<double>(gt.X.rows() * gt.X.cols());
  const double sigma = std::sqrt(energy / (count * std::pow(10.0, snr_db / 10.0)));
  Rng rng(seed);
  for (double& w : gt.noise.data()) w = sigma * rng.normal();
  gt.X += gt.noise;
  return gt;
}

GroundTruth generate_instance(const InstanceParams& params, const SignatureLibrary* library) {
  Rng seeds(params.seed);
  const std::uint64_t endmember_seed = seeds.next();
  const std::uint64_t noise_seed = seeds.next();

  const Matrix A = sample_endmembers(params.M, params.N, endmember_seed, library);
  constexpr int kRedraws = 20;
  for (int attempt = 0; attempt < kRedraws; ++attempt) {
    Matrix S = sample_abundances(params.N, params.L, params.purity_r, seeds.next());
    if (params.L >= params.N && smallest_singular_value(S) <= kRankTol) continue;
    GroundTruth gt = assemble_dataset(A, S, params.snr_db, noise_seed);
    gt.purity_r = params.purity_r;
    gt.seed = params.seed;
    return gt;
  }
  throw Error(ErrorCode::kRankDeficientData, "abundance draws keep failing the row-rank check");
}

}  // namespace mvie
