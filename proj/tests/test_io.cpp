#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mvie/error.hpp"
#include "mvie/io.hpp"
#include "mvie/pipeline.hpp"
#include "mvie/synth.hpp"
#include "support.hpp"

using namespace mvie;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected mvie::Error");
  return ErrorCode::kIo;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("mvie_io_test_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("matrix CSV round trip is exact") {
  TempDir dir;
  oracle::TestRng rng(81);
  Matrix m = rng.gaussian(7, 13);
  m(0, 0) = 1e-300;
  m(1, 1) = -0.1;
  write_matrix_csv(m, dir.path / "m.csv");
  CHECK(read_matrix_csv(dir.path / "m.csv") == m);

  const std::string text = slurp(dir.path / "m.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
  CHECK(text.find(',') != std::string::npos);
}

TEST_CASE("matrix CSV errors") {
  TempDir dir;
  CHECK(code_of([&] { read_matrix_csv(dir.path / "missing.csv"); }) == ErrorCode::kIo);
  std::ofstream(dir.path / "ragged.csv") << "1,2,3\n4,5\n";
  CHECK(code_of([&] { read_matrix_csv(dir.path / "ragged.csv"); }) == ErrorCode::kIo);
  std::ofstream(dir.path / "word.csv") << "1,abc\n";
  CHECK(code_of([&] { read_matrix_csv(dir.path / "word.csv"); }) == ErrorCode::kIo);
  std::ofstream(dir.path / "nan.csv") << "1,nan\n";
  CHECK(code_of([&] { read_matrix_csv(dir.path / "nan.csv"); }) == ErrorCode::kNotFinite);
}

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
}

TEST_CASE("truth sidecar round trip") {
  TempDir dir;
  const InstanceParams p{12, 3, 20, 0.9, INFINITY, 5};
  const GroundTruth gt = generate_instance(p);
  write_truth_json(gt, p, dir.path / "truth.json");
  const TruthFile back = read_truth_json(dir.path / "truth.json");
  CHECK(back.A == gt.A);
  CHECK(back.S == gt.S);
  CHECK(back.params.N == 3);
  CHECK(back.params.M == 12);
  CHECK(back.params.L == 20);
  CHECK(std::isinf(back.params.snr_db));
  CHECK(back.params.seed == 5);

  const auto j = nlohmann::json::parse(slurp(dir.path / "truth.json"));
  CHECK(j["A"].size() == 36);
  CHECK(j["S"].size() == 60);
  CHECK(j["params"]["snr_db"] == "inf");
  CHECK(j["params"]["r"] == 0.9);
}

TEST_CASE("solver config JSON") {
  const FpgmConfig defaults;
  const FpgmConfig cfg = fpgm_config_from_json(nlohmann::json{{"rho", 500}, {"max_iter", 10}});
  CHECK(cfg.rho == 500);
  CHECK(cfg.max_iter == 10);
  CHECK(cfg.alpha == defaults.alpha);
  const FpgmConfig again = fpgm_config_from_json(fpgm_config_to_json(cfg));
  CHECK(again.rho == cfg.rho);
  CHECK(again.eps == cfg.eps);
  CHECK(again.tol_rel == cfg.tol_rel);
  CHECK(code_of([] { fpgm_config_from_json(nlohmann::json{{"rh0", 1}}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { fpgm_config_from_json(nlohmann::json{{"beta", 2}}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { fpgm_config_from_json(nlohmann::json{{"rho", "x"}}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { load_fpgm_config("/nonexistent/cfg.json"); }) == ErrorCode::kIo);
}

TEST_CASE("report JSON") {
  const GroundTruth gt = generate_instance({20, 3, 100, 0.9, INFINITY, 8});
  PipelineConfig cfg;
  cfg.estimate_abundances = true;
  const RecoveryReport rep = run_recovery(gt.X, 3, cfg);
  const auto j = report_to_json(rep, 0.25);
  CHECK(j["A_hat"].size() == 20);
  CHECK(j["A_hat"][0].size() == 3);
  CHECK(j["S_hat"].size() == 3);
  CHECK(j["contacts_reduced"].size() == 3);
  CHECK(j["facet_count"] == rep.facet_count);
  CHECK(j["phi_deg"] == 0.25);
  CHECK(j.contains("solver"));
  CHECK(j.contains("timings"));
  CHECK_FALSE(report_to_json(rep).contains("phi_deg"));
}
