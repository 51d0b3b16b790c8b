#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "mvie/mvie.hpp"
#include "mvie/numerics.hpp"
#include "mvie/pipeline.hpp"
#include "mvie/synth.hpp"

namespace mvie {

/// Matrix CSV: no header, one row per matrix row, 17 significant digits.
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Shortest decimal that round-trips; "inf"/"-inf"/"nan" for non-finite.
std::string format_double(double x);

struct TruthFile {
  Matrix A;
  Matrix S;
  InstanceParams params;
};

/// Ground-truth sidecar: {"A": [...], "S": [...], "params": {N,M,L,r,snr_db,seed}}
/// with A and S flattened row-major.
nlohmann::json truth_to_json(const GroundTruth& gt, const InstanceParams& params);
void write_truth_json(const GroundTruth& gt, const InstanceParams& params,
                      const std::filesystem::path& path);
TruthFile read_truth_json(const std::filesystem::path& path);

/// Solver config JSON with optional keys rho, eps, alpha, beta, t_max,
/// max_iter, tol_rel; absent keys keep their defaults, unknown keys fail.
FpgmConfig fpgm_config_from_json(const nlohmann::json& j);
FpgmConfig load_fpgm_config(const std::filesystem::path& path);
nlohmann::json fpgm_config_to_json(const FpgmConfig& cfg);

nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json report_to_json(const RecoveryReport& report, std::optional<double> phi_deg = std::nullopt);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mvie
