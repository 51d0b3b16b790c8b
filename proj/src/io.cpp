#include "mvie/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mvie/error.hpp"

namespace mvie {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::string text;
  text.reserve(m.rows() * m.cols() * 24);
  char buf[40];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      if (c) text.push_back(',');
      text += buf;
    }
    text.push_back('\n');
  }
  write_text_file(path, text);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      const char* s = p;
      while (s < comma && *s == ' ') ++s;
      const auto res = std::from_chars(s, comma, v);
      if (res.ec != std::errc() || res.ptr != comma) {
        throw Error(ErrorCode::kIo, path.string() + ": bad number on row " + std::to_string(rows + 1));
      }
      if (!std::isfinite(v)) throw Error(ErrorCode::kNotFinite, path.string() + ": non-finite entry");
      values.push_back(v);
      ++count;
      p = comma + 1;
    }
    if (rows == 0) cols = count;
    if (count != cols) throw Error(ErrorCode::kIo, path.string() + ": ragged row " + std::to_string(rows + 1));
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::kIo, path.string() + " is empty");
  return Matrix(rows, cols, std::move(values));
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

namespace {

json snr_to_json(double snr) {
  if (std::isinf(snr)) return snr > 0 ? "inf" : "-inf";
  return snr;
}

double snr_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return INFINITY;
    throw Error(ErrorCode::kIo, "bad snr_db value " + s);
  }
  return j.get<double>();
}

Matrix flat_matrix(const json& j, std::size_t rows, std::size_t cols, const char* name) {
  auto data = j.get<std::vector<double>>();
  if (data.size() != rows * cols) throw Error(ErrorCode::kIo, std::string("truth ") + name + " has wrong size");
  return Matrix(rows, cols, std::move(data));
}

}  // namespace

json truth_to_json(const GroundTruth& gt, const InstanceParams& params) {
  json j;
  j["A"] = gt.A.data();
  j["S"] = gt.S.data();
  j["params"] = {{"N", params.N}, {"M", params.M},          {"L", params.L},
                 {"r", params.purity_r}, {"snr_db", snr_to_json(params.snr_db)}, {"seed", params.seed}};
  return j;
}

void write_truth_json(const GroundTruth& gt, const InstanceParams& params, const std::filesystem::path& path) {
  write_text_file(path, truth_to_json(gt, params).dump() + "\n");
}

TruthFile read_truth_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    const json j = json::parse(in);
    TruthFile t;
    const json& p = j.at("params");
    t.params.N = p.at("N").get<std::size_t>();
    t.params.M = p.at("M").get<std::size_t>();
    t.params.L = p.at("L").get<std::size_t>();
    t.params.purity_r = p.at("r").get<double>();
    t.params.snr_db = snr_from_json(p.at("snr_db"));
    t.params.seed = p.at("seed").get<std::uint64_t>();
    t.A = flat_matrix(j.at("A"), t.params.M, t.params.N, "A");
    t.S = flat_matrix(j.at("S"), t.params.N, t.params.L, "S");
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, path.string() + ": " + e.what());
  }
}

FpgmConfig fpgm_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "solver config must be a JSON object");
  FpgmConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "rho") cfg.rho = value.get<double>();
      else if (key == "eps") cfg.eps = value.get<double>();
      else if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "beta") cfg.beta = value.get<double>();
      else if (key == "t_max") cfg.t_max = value.get<double>();
      else if (key == "max_iter") cfg.max_iter = value.get<std::size_t>();
      else if (key == "tol_rel") cfg.tol_rel = value.get<double>();
      else throw Error(ErrorCode::kInvalidArgument, "unknown solver config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("solver config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

FpgmConfig load_fpgm_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, path.string() + ": " + e.what());
  }
  return fpgm_config_from_json(j);
}

json fpgm_config_to_json(const FpgmConfig& cfg) {
  return {{"rho", cfg.rho},     {"eps", cfg.eps},           {"alpha", cfg.alpha},    {"beta", cfg.beta},
          {"t_max", cfg.t_max}, {"max_iter", cfg.max_iter}, {"tol_rel", cfg.tol_rel}};
}

json report_to_json(const RecoveryReport& report, std::optional<double> phi_deg) {
  json j;
  j["A_hat"] = matrix_to_json(report.A_hat);
  j["contacts_reduced"] = report.contacts_reduced;
  j["contacts_ambient"] = report.contacts_ambient;
  j["raw_contact_count"] = report.raw_contact_count;
  j["contact_slacks"] = report.contact_slacks;
  if (report.S_hat) j["S_hat"] = matrix_to_json(*report.S_hat);
  j["ellipsoid"] = {{"F", matrix_to_json(report.reduced_ellipsoid.F)}, {"c", report.reduced_ellipsoid.c}};
  j["facet_count"] = report.facet_count;
  j["affine_fit"] = {{"residual", report.fit_residual}, {"model_mismatch", report.model_mismatch}};
  const auto& s = report.solver;
  j["solver"] = {{"iterations", s.iterations},
                 {"final_objective", s.final_objective},
                 {"restarts", s.restarts},
                 {"polish_steps", s.polish_steps},
                 {"termination", std::string(to_string(s.termination))},
                 {"rho_schedule", s.rho_schedule},
                 {"objective_trace_length", s.objective_trace.size()}};
  j["timings"] = report.timings;
  if (phi_deg) j["phi_deg"] = *phi_deg;
  return j;
}

}  // namespace mvie
