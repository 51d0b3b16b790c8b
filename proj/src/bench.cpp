#include "mvie/bench.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <thread>
#include <tuple>

#include "mvie/error.hpp"
#include "mvie/io.hpp"
#include "mvie/synth.hpp"

namespace mvie {

void BenchSpec::validate() const {
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be at least 1");
  if (Ns.empty() || purities.empty() || snrs_db.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "bench grid has an empty axis");
  }
  if (jobs < 1) throw Error(ErrorCode::kInvalidArgument, "jobs must be at least 1");
  for (std::size_t N : Ns) {
    if (N < 2 || N > M || N > L) throw Error(ErrorCode::kInvalidArgument, "N must satisfy 2 <= N <= min(M, L)");
    for (double r : purities) {
      if (!(r > 1.0 / std::sqrt(static_cast<double>(N))) || r > 1.0) {
        throw Error(ErrorCode::kInfeasiblePurity,
                    "infeasible purity " + format_double(r) + " for N = " + std::to_string(N));
      }
    }
  }
}

TrialResult run_trial(std::size_t N, std::size_t M, std::size_t L, double r, double snr_db,
                      std::uint64_t seed, const PipelineConfig& cfg) {
  TrialResult row;
  row.N = N;
  row.M = M;
  row.L = L;
  row.r = r;
  row.snr_db = snr_db;
  row.seed = seed;
  try {
    InstanceParams params{M, N, L, r, snr_db, seed};
    const GroundTruth gt = generate_instance(params);
    PipelineConfig trial_cfg = cfg;
    trial_cfg.seed = seed;
    const RecoveryReport report = run_recovery(gt.X, N, trial_cfg);
    const AngleError err = rms_angle_error(gt.A, report.A_hat);
    row.rms_angle_deg = err.phi_deg;
    row.permutation = err.permutation;
    row.K_facets = report.facet_count;
    row.runtimes_sec = report.timings;
  } catch (const StageError& e) {
    row.status = e.stage() + ":" + std::string(to_string(e.code()));
    row.rms_angle_deg = NAN;
  } catch (const Error& e) {
    row.status = "synth:" + std::string(to_string(e.code()));
    row.rms_angle_deg = NAN;
  }
  return row;
}

std::vector<TrialResult> run_bench(const BenchSpec& spec) {
  spec.validate();
  struct Job {
    std::size_t N;
    double r;
    double snr;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t N : spec.Ns)
    for (double r : spec.purities)
      for (double snr : spec.snrs_db)
        for (std::size_t t = 0; t < spec.trials; ++t) jobs.push_back({N, r, snr, spec.base_seed + t});

  std::vector<TrialResult> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      rows[i] = run_trial(j.N, spec.M, spec.L, j.r, j.snr, j.seed, spec.pipeline);
    }
  };
  const std::size_t threads = std::min(spec.jobs, jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return rows;
}

namespace {

double timing(const TrialResult& row, const char* stage) {
  const auto it = row.runtimes_sec.find(stage);
  return it == row.runtimes_sec.end() ? 0.0 : it->second;
}

}  // namespace

std::string trials_csv(const std::vector<TrialResult>& rows, bool with_timings) {
  std::string out = "N,M,L,r,snr_db,seed,status,phi_deg,K,t_dimred,t_hull,t_solve,t_recover,t_total\n";
  for (const auto& row : rows) {
    out += std::to_string(row.N) + ',' + std::to_string(row.M) + ',' + std::to_string(row.L) + ',' +
           format_double(row.r) + ',' + format_double(row.snr_db) + ',' + std::to_string(row.seed) + ',' +
           row.status + ',' + format_double(row.rms_angle_deg) + ',' + std::to_string(row.K_facets);
    for (const char* stage : {"dimred", "hull", "solve", "recover", "total"}) {
      out += ',';
      out += format_double(with_timings ? timing(row, stage) : 0.0);
    }
    out += '\n';
  }
  return out;
}

std::string summary_csv(const std::vector<TrialResult>& rows, bool with_timings) {
  struct Acc {
    std::size_t M = 0, L = 0, trials = 0, ok = 0;
    double sum = 0.0, sum_sq = 0.0, k_sum = 0.0, t_sum = 0.0;
  };
  std::map<std::tuple<std::size_t, double, double>, Acc> cells;
  std::vector<std::tuple<std::size_t, double, double>> order;
  for (const auto& row : rows) {
    const auto key = std::make_tuple(row.N, row.r, row.snr_db);
    auto [it, inserted] = cells.try_emplace(key);
    if (inserted) order.push_back(key);
    Acc& a = it->second;
    a.M = row.M;
    a.L = row.L;
    ++a.trials;
    if (row.status != "ok") continue;
    ++a.ok;
    a.sum += row.rms_angle_deg;
    a.sum_sq += row.rms_angle_deg * row.rms_angle_deg;
    a.k_sum += static_cast<double>(row.K_facets);
    if (with_timings) a.t_sum += timing(row, "total");
  }
  std::string out = "N,M,L,r,snr_db,trials,ok,phi_mean,phi_std,K_mean,t_total_mean\n";
  for (const auto& key : order) {
    const Acc& a = cells.at(key);
    const double n = static_cast<double>(a.ok);
    const double mean = a.ok ? a.sum / n : NAN;
    // Sample standard deviation, as in mean±std tables.
    const double var = a.ok > 1 ? std::max(0.0, (a.sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    out += std::to_string(std::get<0>(key)) + ',' + std::to_string(a.M) + ',' + std::to_string(a.L) + ',' +
           format_double(std::get<1>(key)) + ',' + format_double(std::get<2>(key)) + ',' +
           std::to_string(a.trials) + ',' + std::to_string(a.ok) + ',' + format_double(mean) + ',' +
           format_double(a.ok ? std::sqrt(var) : NAN) + ',' + format_double(a.ok ? a.k_sum / n : NAN) + ',' +
           format_double(a.ok ? a.t_sum / n : NAN) + '\n';
  }
  return out;
}

}  // namespace mvie
