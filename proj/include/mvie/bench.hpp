#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mvie/metrics.hpp"
#include "mvie/pipeline.hpp"

namespace mvie {

/// Grid of (N, r, snr_db) cells, each run for `trials` independent instances
/// with seeds base_seed + trial index.
struct BenchSpec {
  std::vector<std::size_t> Ns{3};
  std::vector<double> purities{1.0};
  std::vector<double> snrs_db{INFINITY};
  std::size_t trials = 20;
  std::uint64_t base_seed = 0;
  std::size_t M = 224;
  std::size_t L = 1000;
  PipelineConfig pipeline;
  std::size_t jobs = 1;

  void validate() const;
};

/// Runs every (cell, trial) of the grid. Per-trial failures are recorded in
/// TrialResult::status and do not stop the run. Rows come back in grid order
/// (N, then r, then snr, then trial) regardless of `jobs`.
std::vector<TrialResult> run_bench(const BenchSpec& spec);

/// One trial: generate the instance, recover, score.
TrialResult run_trial(std::size_t N, std::size_t M, std::size_t L, double r, double snr_db,
                      std::uint64_t seed, const PipelineConfig& cfg);

/// Header `N,M,L,r,snr_db,seed,status,phi_deg,K,t_dimred,t_hull,t_solve,t_recover,t_total`.
std::string trials_csv(const std::vector<TrialResult>& rows, bool with_timings = true);

/// Per-cell mean and standard deviation of φ over successful trials.
std::string summary_csv(const std::vector<TrialResult>& rows, bool with_timings = true);

}  // namespace mvie
