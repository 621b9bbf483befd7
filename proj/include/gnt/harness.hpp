#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gnt/agent.hpp"
#include "gnt/config.hpp"
#include "gnt/env/trace_conditioning.hpp"
#include "gnt/env/trace_patterning.hpp"
#include "gnt/evaluation.hpp"
#include "gnt/rng.hpp"
#include "gnt/snapshot.hpp"
#include "gnt/version.hpp"

namespace gnt {

// Optional per-step log kept by a run; needed for trial dumps and
// prediction-level analyses. Binning only needs predictions and cumulants,
// which every run records internally either way.
struct RunLog {
  std::vector<double> predictions;
  std::vector<double> cumulants;
  std::vector<double> td_errors;
  std::vector<TrialInfo> trials;
  bool record_signals = false;
  int num_signals = 0;
  std::vector<std::uint8_t> signals;  // row-major step x signal
  ReturnSeries returns;               // filled after the run
};

struct DiagSample {
  std::uint64_t step = 0;
  int live_deep = 0;
  int live_imprint = 0;
  double prediction = 0.0;
  double td_error = 0.0;
};

struct RunResult {
  int run_index = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::uint64_t steps = 0;
  std::uint64_t trials_completed = 0;
  BinnedError bins;
  std::vector<DiagSample> diag;  // one sample per bin
};

namespace detail {

// Drives agent against env until cfg.trials trials have been emitted in
// full. Divergence marks the result failed; config errors propagate.
template <typename Env>
RunResult run_loop(const ExperimentConfig& cfg, Env& env, Agent& agent, int run_index,
                   std::uint64_t run_seed, RunLog* log) {
  RunResult result;
  result.run_index = run_index;
  result.seed = run_seed;

  std::vector<double> predictions;
  std::vector<double> cumulants;
  if (log) {
    log->num_signals = cfg.num_signals();
    log->predictions.clear();
    log->cumulants.clear();
    log->td_errors.clear();
    log->trials.clear();
    log->signals.clear();
  }

  try {
    const std::uint64_t step_bound = cfg.max_steps();
    for (std::uint64_t t = 0;; ++t) {
      if (t > step_bound)
        throw ContractViolation("run exceeded its step bound; environment config is inconsistent");
      const Observation& obs = env.step();
      if (env.trials_started() > cfg.trials) break;  // this step would begin an extra trial
      if (log && env.last_annotation()) log->trials.push_back(*env.last_annotation());

      const StepRecord rec = agent.step(obs);
      predictions.push_back(rec.prediction);
      cumulants.push_back(obs.cumulant);
      if (log) {
        log->td_errors.push_back(rec.td_error);
        if (log->record_signals)
          for (double s : obs.signals) log->signals.push_back(s != 0.0 ? 1 : 0);
      }
      if (t % cfg.bin_size == 0)
        result.diag.push_back({t, rec.live_deep, rec.live_imprint, rec.prediction, rec.td_error});
    }

    result.steps = static_cast<std::uint64_t>(predictions.size());
    result.trials_completed = cfg.trials;
    const ReturnSeries returns = compute_returns(cumulants, cfg.agent.learner.gamma);
    result.bins = bin_msre(predictions, returns, cfg.bin_size);
    if (log) {
      log->predictions = std::move(predictions);
      log->cumulants = std::move(cumulants);
      log->returns = returns;
    }
  } catch (const DivergenceError& e) {
    result.ok = false;
    result.error = std::string(e.what()) + " (run " + std::to_string(run_index) + ", seed " +
                   std::to_string(run_seed) + ")";
  }
  return result;
}

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::uint64_t run_seed_for(std::uint64_t master_seed, int run_index) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(run_index));
}

// One run, fully determined by (config, run_seed). The environment and agent
// use independent streams derived from the run seed. Pass a log to keep the
// per-step record; pass final_network to receive the end-of-run snapshot.
inline RunResult run_single(const ExperimentConfig& cfg, int run_index, std::uint64_t run_seed,
                            RunLog* log = nullptr, nlohmann::json* final_network = nullptr) {
  const std::uint64_t env_seed = derive_seed(run_seed, 1);
  const std::uint64_t agent_seed = derive_seed(run_seed, 2);
  Agent agent(cfg.agent, cfg.num_signals(), agent_seed);
  RunResult result;
  if (cfg.problem == Problem::TraceConditioning) {
    TraceConditioningEnv env(cfg.tc, env_seed);
    result = detail::run_loop(cfg, env, agent, run_index, run_seed, log);
  } else {
    TracePatterningEnv env(cfg.tp, env_seed);
    result = detail::run_loop(cfg, env, agent, run_index, run_seed, log);
  }
  if (final_network) *final_network = network_snapshot(agent.network());
  return result;
}

// Worker count: explicit argument wins, then the GNT_WORKERS environment
// variable, then hardware concurrency. Results are identical regardless.
inline int resolve_workers(int requested, int n_runs) {
  int workers = requested;
  if (workers <= 0) {
    if (const char* env = std::getenv("GNT_WORKERS")) workers = std::atoi(env);
  }
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 0) workers = 1;
  return std::min(workers, std::max(1, n_runs));
}

inline std::vector<RunResult> run_many(const ExperimentConfig& cfg, std::uint64_t master_seed,
                                       int n_runs, int workers = 0) {
  if (n_runs <= 0) throw ConfigError("runs must be positive");
  workers = resolve_workers(workers, n_runs);
  std::vector<RunResult> results(static_cast<std::size_t>(n_runs));

  if (workers == 1) {
    for (int i = 0; i < n_runs; ++i)
      results[static_cast<std::size_t>(i)] = run_single(cfg, i, run_seed_for(master_seed, i));
    return results;
  }

  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_runs) return;
        results[static_cast<std::size_t>(i)] = run_single(cfg, i, run_seed_for(master_seed, i));
      }
    });
  }
  for (std::thread& t : pool) t.join();
  return results;
}

inline std::vector<BinnedError> ok_bins(const std::vector<RunResult>& results) {
  std::vector<BinnedError> bins;
  for (const RunResult& r : results)
    if (r.ok) bins.push_back(r.bins);
  return bins;
}

// ---- result files ----------------------------------------------------------

inline void write_run_csv(const std::filesystem::path& path, const RunResult& result) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "bin_index,steps,msre\n";
  for (std::size_t b = 0; b < result.bins.msre.size(); ++b)
    out << b << ',' << result.bins.counts[b] << ',' << detail::fmt_double(result.bins.msre[b])
        << '\n';
}

inline void write_diag_csv(const std::filesystem::path& path, const RunResult& result) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "step,live_deep,live_imprint,prediction,td_error\n";
  for (const DiagSample& d : result.diag)
    out << d.step << ',' << d.live_deep << ',' << d.live_imprint << ','
        << detail::fmt_double(d.prediction) << ',' << detail::fmt_double(d.td_error) << '\n';
}

inline void write_aggregate_csv(const std::filesystem::path& path, const AggregateBins& agg) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "bin_index,msre_mean,msre_stderr,n_runs\n";
  for (std::size_t b = 0; b < agg.mean.size(); ++b)
    out << b << ',' << detail::fmt_double(agg.mean[b]) << ','
        << detail::fmt_double(agg.stderr_[b]) << ',' << agg.n_runs << '\n';
}

inline void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg,
                           std::uint64_t master_seed, const std::vector<RunResult>& results) {
  nlohmann::json runs = nlohmann::json::array();
  for (const RunResult& r : results) {
    runs.push_back({{"run_index", r.run_index},
                    {"seed", r.seed},
                    {"ok", r.ok},
                    {"error", r.error},
                    {"steps", r.steps},
                    {"trials", r.trials_completed}});
  }
  const nlohmann::json manifest{{"version", kVersion},
                                {"master_seed", master_seed},
                                {"n_runs", results.size()},
                                {"config", to_json_config(cfg)},
                                {"runs", runs}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
}

// Runs the experiment and writes per-run CSVs, the aggregate CSV, the
// resolved config, and the manifest into out_dir. Returns false when every
// run failed. Outputs depend only on (config, master_seed).
inline bool run_experiment(const ExperimentConfig& cfg, std::uint64_t master_seed, int n_runs,
                           const std::filesystem::path& out_dir, int workers = 0) {
  std::filesystem::create_directories(out_dir);
  const std::vector<RunResult> results = run_many(cfg, master_seed, n_runs, workers);

  {
    std::ofstream out(out_dir / "config.json");
    if (!out) throw ConfigError("cannot write " + (out_dir / "config.json").string());
    out << to_json_config(cfg).dump(2) << '\n';
  }
  write_manifest(out_dir / "manifest.json", cfg, master_seed, results);

  char name[32];
  for (const RunResult& r : results) {
    if (!r.ok) continue;
    std::snprintf(name, sizeof(name), "run_%03d.csv", r.run_index);
    write_run_csv(out_dir / name, r);
    std::snprintf(name, sizeof(name), "run_%03d_diag.csv", r.run_index);
    write_diag_csv(out_dir / name, r);
  }

  const std::vector<BinnedError> bins = ok_bins(results);
  if (!bins.empty()) write_aggregate_csv(out_dir / "aggregate.csv", aggregate_runs(bins));
  return !bins.empty();
}

// ---- trial and stream dumps --------------------------------------------------

inline std::vector<std::string> signal_names(const ExperimentConfig& cfg) {
  std::vector<std::string> names;
  if (cfg.problem == Problem::TraceConditioning) {
    names.push_back("cs");
    for (int k = 1; k <= cfg.tc.num_distractors; ++k) names.push_back("d" + std::to_string(k));
    if (cfg.tc.us_in_observation) names.push_back("us");
  } else {
    for (int c = 1; c <= cfg.tp.num_cs; ++c) names.push_back("cs" + std::to_string(c));
    for (int k = 1; k <= cfg.tp.num_distractors; ++k) names.push_back("d" + std::to_string(k));
    if (cfg.tp.us_in_observation) names.push_back("us");
  }
  return names;
}

// Per-step trace of one trial window from a freshly executed run: every
// observation signal, the cumulant, the agent's prediction, the true return,
// and the TD error. trial < 0 selects a late trial (two before the end).
// Writes trial_XXXXXX.csv plus network.json (end-of-run snapshot) into
// out_dir and returns the CSV path.
inline std::filesystem::path dump_trial(const ExperimentConfig& cfg, std::uint64_t master_seed,
                                        std::int64_t trial, const std::filesystem::path& out_dir,
                                        int run_index = 0) {
  if (trial >= static_cast<std::int64_t>(cfg.trials))
    throw ConfigError("trial index " + std::to_string(trial) + " out of range (run has " +
                      std::to_string(cfg.trials) + " trials)");
  const std::uint64_t trial_index =
      trial >= 0 ? static_cast<std::uint64_t>(trial) : (cfg.trials >= 2 ? cfg.trials - 2 : 0);

  RunLog log;
  log.record_signals = true;
  nlohmann::json snapshot;
  const RunResult result =
      run_single(cfg, run_index, run_seed_for(master_seed, run_index), &log, &snapshot);
  if (!result.ok) throw DivergenceError(result.steps, result.error);

  const TrialInfo* info = nullptr;
  std::uint64_t window_end = log.predictions.size();
  for (std::size_t i = 0; i < log.trials.size(); ++i) {
    if (log.trials[i].trial_index == trial_index) {
      info = &log.trials[i];
      if (i + 1 < log.trials.size()) window_end = log.trials[i + 1].cs_onset_step;
      break;
    }
  }
  if (!info) throw ConfigError("trial " + std::to_string(trial_index) + " not found in run");
  const std::uint64_t window_start = info->cs_onset_step >= 5 ? info->cs_onset_step - 5 : 0;

  std::filesystem::create_directories(out_dir);
  char name[48];
  std::snprintf(name, sizeof(name), "trial_%06llu.csv",
                static_cast<unsigned long long>(trial_index));
  const std::filesystem::path csv_path = out_dir / name;
  std::ofstream out(csv_path);
  if (!out) throw ConfigError("cannot write " + csv_path.string());

  const std::vector<std::string> names = signal_names(cfg);
  out << "step";
  for (const std::string& n : names) out << ',' << n;
  out << ",cumulant,prediction,return,td_error\n";
  const int m = log.num_signals;
  for (std::uint64_t t = window_start; t < window_end && t < log.predictions.size(); ++t) {
    out << t;
    for (int s = 0; s < m; ++s)
      out << ',' << int(log.signals[static_cast<std::size_t>(t) * static_cast<std::size_t>(m) +
                                    static_cast<std::size_t>(s)]);
    out << ',' << detail::fmt_double(log.cumulants[t]) << ','
        << detail::fmt_double(log.predictions[t]) << ','
        << detail::fmt_double(log.returns.values[t]) << ','
        << detail::fmt_double(log.td_errors[t]) << '\n';
  }
  out.close();

  std::ofstream snap(out_dir / "network.json");
  if (!snap) throw ConfigError("cannot write " + (out_dir / "network.json").string());
  snap << snapshot.dump(2) << '\n';
  return csv_path;
}

// Raw observation stream as CSV (no agent), for inspection. The stream
// matches what run_index 0 of the same master seed sees.
inline void dump_stream(const ExperimentConfig& cfg, std::uint64_t master_seed,
                        std::uint64_t steps, const std::filesystem::path& out_path,
                        int run_index = 0) {
  const std::uint64_t env_seed = derive_seed(run_seed_for(master_seed, run_index), 1);
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot write " + out_path.string());
  const std::vector<std::string> names = signal_names(cfg);
  out << "step";
  for (const std::string& n : names) out << ',' << n;
  out << ",cumulant\n";

  auto emit = [&](auto& env) {
    for (std::uint64_t t = 0; t < steps; ++t) {
      const Observation& obs = env.step();
      out << t;
      for (double s : obs.signals) out << ',' << (s != 0.0 ? 1 : 0);
      out << ',' << detail::fmt_double(obs.cumulant) << '\n';
    }
  };
  if (cfg.problem == Problem::TraceConditioning) {
    TraceConditioningEnv env(cfg.tc, env_seed);
    emit(env);
  } else {
    TracePatterningEnv env(cfg.tp, env_seed);
    emit(env);
  }
}

}  // namespace gnt
