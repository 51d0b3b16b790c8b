#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvie/numerics.hpp"

namespace mvie {

/// One synthetic SSMF instance X = A·S + W.
struct GroundTruth {
  Matrix A;      // M×N endmember signatures
  Matrix S;      // N×L abundances, columns on the unit simplex
  Matrix X;      // M×L observations
  Matrix noise;  // M×L, zero when snr_db is infinite
  double purity_r = 1.0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

struct SignatureLibrary {
  std::vector<std::string> names;
  Matrix signatures;  // bands × materials
};

/// Reads a signature table: header `band,name1,...,nameK`, then one row per
/// band whose first field is the band label.
SignatureLibrary load_signature_library(const std::filesystem::path& path);

/// Draws N endmember columns of length M. Without a library the columns are
/// smooth sums of Gaussian bumps rescaled to [0.05, 1]; any column closer
/// than 5° to another is redrawn.
Matrix sample_endmembers(std::size_t M, std::size_t N, std::uint64_t seed,
                         const SignatureLibrary* library = nullptr);

/// Dirichlet(1/N) abundances whose Euclidean norm is at most r.
Matrix sample_abundances(std::size_t N, std::size_t L, double r, std::uint64_t seed);

/// X = A·S + W with W ~ N(0, σ²), σ² = ‖AS‖²_F / (M·L·10^(snr_db/10)).
/// An infinite snr_db yields W = 0.
GroundTruth assemble_dataset(const Matrix& A, const Matrix& S, double snr_db,
                             std::uint64_t seed);

struct InstanceParams {
  std::size_t M = 224;
  std::size_t N = 3;
  std::size_t L = 1000;
  double purity_r = 1.0;
  double snr_db = 0.0;  // +inf for noiseless
  std::uint64_t seed = 0;
};

/// Full generator: endmembers, abundances and noise drawn from seeds derived
/// from params.seed. Abundance draws whose S is numerically row-rank
/// deficient are discarded and redrawn.
GroundTruth generate_instance(const InstanceParams& params,
                              const SignatureLibrary* library = nullptr);

/// Minimum pairwise angle between the columns of a, in degrees.
double min_pairwise_angle_deg(const Matrix& a);

}  // namespace mvie
