// mvie: synthetic SSMF data, MVIE-based blind recovery and benchmarks.
//
// Exit codes: 0 success, 1 I/O, 2 invalid parameters, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvie/bench.hpp"
#include "mvie/error.hpp"
#include "mvie/io.hpp"
#include "mvie/metrics.hpp"
#include "mvie/pipeline.hpp"
#include "mvie/synth.hpp"

namespace fs = std::filesystem;
using namespace mvie;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitParams = 2;
constexpr int kExitNumerical = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
      return kExitIo;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInfeasiblePurity:
    case ErrorCode::kBadDims:
    case ErrorCode::kBadRank:
    case ErrorCode::kDimMismatch:
    case ErrorCode::kLibraryTooSmall:
    case ErrorCode::kTooFewPoints:
      return kExitParams;
    default:
      return kExitNumerical;
  }
}

double parse_snr(const std::string& s) {
  if (s == "inf" || s == "+inf" || s == "Inf") return INFINITY;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && !std::isnan(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, "bad SNR '" + s + "' (use a number in dB or 'inf')");
}

struct SolverFlags {
  std::string config_path;
  std::string solver = "high-accuracy";
  double tau = 1e-5;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Solver config JSON (rho, eps, alpha, beta, t_max, max_iter, tol_rel)");
  cmd->add_option("--solver", flags.solver, "fpgm (single penalty weight) or high-accuracy (penalty continuation, then a Newton polish)")
      ->check(CLI::IsMember({"fpgm", "high-accuracy"}));
  cmd->add_option("--tau", flags.tau, "Relative contact slack tolerance")->check(CLI::PositiveNumber);
}

PipelineConfig pipeline_from(const SolverFlags& flags) {
  PipelineConfig cfg;
  if (!flags.config_path.empty()) cfg.fpgm = load_fpgm_config(flags.config_path);
  cfg.high_accuracy = flags.solver == "high-accuracy";
  cfg.contact_tau = flags.tau;
  return cfg;
}

struct SynthArgs {
  std::size_t N = 3;
  std::size_t M = 224;
  std::size_t L = 1000;
  double purity = 1.0;
  std::string snr = "inf";
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string library;
};

int cmd_synth(const SynthArgs& a) {
  InstanceParams params{a.M, a.N, a.L, a.purity, parse_snr(a.snr), a.seed};
  std::optional<SignatureLibrary> lib;
  if (!a.library.empty()) lib = load_signature_library(a.library);
  const GroundTruth gt = generate_instance(params, lib ? &*lib : nullptr);
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + a.out + ": " + ec.message());
  write_matrix_csv(gt.X, fs::path(a.out) / "X.csv");
  write_truth_json(gt, params, fs::path(a.out) / "truth.json");
  std::printf("synth: M=%zu N=%zu L=%zu r=%s snr_db=%s seed=%llu -> %s\n", a.M, a.N, a.L,
              format_double(a.purity).c_str(), format_double(params.snr_db).c_str(),
              static_cast<unsigned long long>(a.seed), a.out.c_str());
  std::printf("  min endmember angle %.3f deg, realized snr %s dB\n", min_pairwise_angle_deg(gt.A),
              format_double(snr_of(gt.A * gt.S, gt.noise)).c_str());
  return 0;
}

struct RunArgs {
  std::string input;
  std::size_t N = 0;
  std::string truth;
  std::string out;
  std::string facets_in;
  std::string facets_out;
  std::uint64_t seed = 0;
  bool emit_shat = false;
  SolverFlags solver;
};

int cmd_run(const RunArgs& a) {
  Matrix X;
  try {
    X = read_matrix_csv(a.input);
  } catch (const Error& e) {
    throw StageError("io", e);
  }
  std::optional<TruthFile> truth;
  if (!a.truth.empty()) {
    try {
      truth = read_truth_json(a.truth);
    } catch (const Error& e) {
      throw StageError("io", e);
    }
  }
  PipelineConfig cfg = pipeline_from(a.solver);
  cfg.seed = a.seed;
  cfg.estimate_abundances = a.emit_shat;
  if (!a.facets_in.empty()) {
    try {
      cfg.facets = read_facets_csv(a.facets_in);
    } catch (const Error& e) {
      throw StageError("io", e);
    }
  }
  const RecoveryReport report = run_recovery(X, a.N, cfg);

  std::optional<double> phi;
  if (truth) {
    if (truth->A.rows() != report.A_hat.rows() || truth->A.cols() != report.A_hat.cols()) {
      throw StageError("metrics", Error(ErrorCode::kDimMismatch, "truth A shape differs from estimate"));
    }
    phi = rms_angle_error(truth->A, report.A_hat).phi_deg;
  }
  if (!a.facets_out.empty()) {
    // Re-enumerate for the dump; run_recovery does not keep the polytope.
    const AffineFit fit = affine_fit(X, a.N);
    write_facets_csv(enumerate_facets(reduce_points(X, fit.chart)), a.facets_out);
  }
  const std::string text = report_to_json(report, phi).dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(a.out, text);
    std::printf("run: K=%zu contacts=%zu iterations=%zu%s -> %s\n", report.facet_count, report.raw_contact_count,
                report.solver.iterations, phi ? (" phi=" + format_double(*phi) + " deg").c_str() : "",
                a.out.c_str());
  }
  return 0;
}

struct BenchArgs {
  std::vector<std::size_t> Ns{3};
  std::vector<double> purities{1.0};
  std::vector<std::string> snrs{"inf"};
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  std::size_t M = 224;
  std::size_t L = 1000;
  std::size_t jobs = 1;
  std::string out = "bench.csv";
  std::string summary;
  bool no_timings = false;
  SolverFlags solver;
};

int cmd_bench(const BenchArgs& a) {
  BenchSpec spec;
  spec.Ns = a.Ns;
  spec.purities = a.purities;
  spec.snrs_db.clear();
  for (const auto& s : a.snrs) spec.snrs_db.push_back(parse_snr(s));
  spec.trials = a.trials;
  spec.base_seed = a.seed;
  spec.M = a.M;
  spec.L = a.L;
  spec.jobs = a.jobs;
  spec.pipeline = pipeline_from(a.solver);
  spec.validate();

  std::vector<TrialResult> rows = run_bench(spec);
  if (a.no_timings) {
    for (auto& row : rows) row.runtimes_sec.clear();
  }
  const fs::path out(a.out);
  const fs::path summary = a.summary.empty()
                               ? out.parent_path() / (out.stem().string() + "_summary.csv")
                               : fs::path(a.summary);
  write_text_file(out, trials_csv(rows, !a.no_timings));
  write_text_file(summary, summary_csv(rows, !a.no_timings));
  std::cout << summary_csv(rows, !a.no_timings);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MVIE-based blind recovery for simplex-structured matrix factorization"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic X = A S + W instance");
  synth_cmd->add_option("--N", synth.N, "Number of endmembers")->required();
  synth_cmd->add_option("--M", synth.M, "Number of bands");
  synth_cmd->add_option("--L", synth.L, "Number of pixels");
  synth_cmd->add_option("--purity", synth.purity, "Numerically controlled purity r in (1/sqrt(N), 1]");
  synth_cmd->add_option("--snr", synth.snr, "SNR in dB, or 'inf' for noiseless");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", synth.out, "Output directory (X.csv, truth.json)");
  synth_cmd->add_option("--library", synth.library, "Signature library CSV (band,name1,...)");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Recover A from a data matrix");
  run_cmd->add_option("--input", run.input, "Data matrix CSV, one row per band")->required();
  run_cmd->add_option("--N", run.N, "Model order")->required();
  run_cmd->add_option("--truth", run.truth, "Ground-truth JSON; adds phi_deg to the report");
  run_cmd->add_option("--out", run.out, "Report JSON path (stdout when absent)");
  run_cmd->add_option("--seed", run.seed, "Seed for contact consolidation");
  run_cmd->add_option("--facets", run.facets_in, "Use precomputed reduced-hull facets (CSV g_1..g_d,h)");
  run_cmd->add_option("--dump-facets", run.facets_out, "Write the enumerated facets as CSV");
  run_cmd->add_flag("--emit-shat", run.emit_shat, "Include abundance estimates in the report");
  add_solver_flags(run_cmd, run.solver);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run the recovery benchmark over a parameter grid");
  bench_cmd->add_option("--N", bench.Ns, "Model orders")->delimiter(',');
  bench_cmd->add_option("--purity", bench.purities, "Purity levels r")->delimiter(',');
  bench_cmd->add_option("--snr", bench.snrs, "SNR levels in dB or 'inf'")->delimiter(',');
  bench_cmd->add_option("--trials", bench.trials, "Trials per cell");
  bench_cmd->add_option("--seed", bench.seed, "Base seed; trial t uses seed + t");
  bench_cmd->add_option("--M", bench.M, "Number of bands");
  bench_cmd->add_option("--L", bench.L, "Number of pixels");
  bench_cmd->add_option("--jobs", bench.jobs, "Worker threads");
  bench_cmd->add_option("--out", bench.out, "Per-trial CSV path");
  bench_cmd->add_option("--summary", bench.summary, "Per-cell summary CSV path (default <out>_summary.csv)");
  bench_cmd->add_flag("--no-timings", bench.no_timings, "Write 0 in timing columns for reproducible output");
  add_solver_flags(bench_cmd, bench.solver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParams;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth);
    if (*run_cmd) return cmd_run(run);
    if (*bench_cmd) return cmd_bench(bench);
  } catch (const StageError& e) {
    std::fprintf(stderr, "error %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  }
  return 0;
}
