// gnt command-line harness: seeded experiment runs, the observations-only
// baseline, and trial/stream dumps. Exit codes: 0 success, 1 configuration
// error, 2 run failure.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gnt/config.hpp"
#include "gnt/harness.hpp"
#include "gnt/version.hpp"

namespace {

struct CommonOptions {
  std::string config_file;
  std::string preset;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::int64_t trials = -1;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_file, "JSON config file");
  cmd->add_option("--preset", opts.preset,
                  "named preset: tc-isi10, tc-isi20, tc-isi30, tp, presence");
  cmd->add_option("--set", opts.overrides, "override a config field, e.g. --set agent.alpha0=0.02")
      ->take_all();
  cmd->add_option("--seed", opts.seed, "master seed");
  cmd->add_option("--trials", opts.trials, "trials per run (overrides config)");
}

gnt::ExperimentConfig build_config(const CommonOptions& opts) {
  if (opts.config_file.empty() && opts.preset.empty())
    throw gnt::ConfigError("either --config or --preset is required");
  gnt::ExperimentConfig cfg;
  if (!opts.config_file.empty())
    cfg = gnt::load_config_file(opts.config_file);
  else
    cfg = gnt::preset(opts.preset);
  for (const std::string& assignment : opts.overrides) gnt::apply_override(cfg, assignment);
  if (opts.trials > 0) {
    cfg.trials = static_cast<std::uint64_t>(opts.trials);
    cfg.resolve();
  }
  return cfg;
}

int report_runs(const std::vector<gnt::RunResult>& results) {
  int failed = 0;
  for (const gnt::RunResult& r : results) {
    if (!r.ok) {
      std::cerr << "run " << r.run_index << " failed: " << r.error << "\n";
      ++failed;
    }
  }
  return failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online agent-state learning by generate-and-test"};
  app.set_version_flag("--version", gnt::kVersion);
  app.require_subcommand(1);

  CommonOptions run_opts;
  int runs = 1;
  int workers = 0;
  std::string out_dir = "out";
  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment and write CSV results");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--runs", runs, "number of independent runs");
  run_cmd->add_option("--workers", workers, "worker threads (default: GNT_WORKERS or all cores)");
  run_cmd->add_option("--out", out_dir, "output directory");

  CommonOptions baseline_opts;
  int baseline_runs = 1;
  int baseline_workers = 0;
  std::string baseline_out = "out";
  CLI::App* baseline_cmd =
      app.add_subcommand("baseline", "run with both generators disabled (presence representation)");
  add_common(baseline_cmd, baseline_opts);
  baseline_cmd->add_option("--runs", baseline_runs, "number of independent runs");
  baseline_cmd->add_option("--workers", baseline_workers, "worker threads");
  baseline_cmd->add_option("--out", baseline_out, "output directory");

  CommonOptions trial_opts;
  std::int64_t trial_index = -1;
  std::string trial_out = "out";
  CLI::App* trial_cmd =
      app.add_subcommand("dump-trial", "write the per-step trace of one trial window");
  add_common(trial_cmd, trial_opts);
  trial_cmd->add_option("--trial", trial_index, "trial index (default: a late trial)");
  trial_cmd->add_option("--out", trial_out, "output directory");

  CommonOptions stream_opts;
  std::uint64_t stream_steps = 2000;
  std::string stream_out = "stream.csv";
  CLI::App* stream_cmd =
      app.add_subcommand("dump-stream", "write the raw observation stream as CSV (no agent)");
  add_common(stream_cmd, stream_opts);
  stream_cmd->add_option("--steps", stream_steps, "steps to emit");
  stream_cmd->add_option("--out", stream_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const gnt::ExperimentConfig cfg = build_config(run_opts);
      const std::vector<gnt::RunResult> results =
          gnt::run_many(cfg, run_opts.seed, runs, workers);
      std::filesystem::create_directories(out_dir);
      std::ofstream cfg_out(std::filesystem::path(out_dir) / "config.json");
      cfg_out << gnt::to_json_config(cfg).dump(2) << '\n';
      cfg_out.close();
      gnt::write_manifest(std::filesystem::path(out_dir) / "manifest.json", cfg, run_opts.seed,
                          results);
      char name[32];
      for (const gnt::RunResult& r : results) {
        if (!r.ok) continue;
        std::snprintf(name, sizeof(name), "run_%03d.csv", r.run_index);
        gnt::write_run_csv(std::filesystem::path(out_dir) / name, r);
        std::snprintf(name, sizeof(name), "run_%03d_diag.csv", r.run_index);
        gnt::write_diag_csv(std::filesystem::path(out_dir) / name, r);
      }
      const std::vector<gnt::BinnedError> bins = gnt::ok_bins(results);
      if (!bins.empty())
        gnt::write_aggregate_csv(std::filesystem::path(out_dir) / "aggregate.csv",
                                 gnt::aggregate_runs(bins));
      const int failed = report_runs(results);
      if (bins.empty()) return 2;
      if (failed > 0) std::cerr << failed << " of " << runs << " runs failed\n";
      std::cout << "wrote " << bins.size() << " run(s) to " << out_dir << "\n";
      return failed > 0 ? 2 : 0;
    }

    if (baseline_cmd->parsed()) {
      gnt::ExperimentConfig cfg = build_config(baseline_opts);
      cfg.agent.deep_trace_enabled = false;
      cfg.agent.imprinting_enabled = false;
      cfg.resolve();
      const bool ok = gnt::run_experiment(cfg, baseline_opts.seed, baseline_runs,
                                          baseline_out, baseline_workers);
      std::cout << "wrote baseline results to " << baseline_out << "\n";
      return ok ? 0 : 2;
    }

    if (trial_cmd->parsed()) {
      const gnt::ExperimentConfig cfg = build_config(trial_opts);
      const std::filesystem::path csv =
          gnt::dump_trial(cfg, trial_opts.seed, trial_index, trial_out);
      std::cout << "wrote " << csv.string() << "\n";
      return 0;
    }

    if (stream_cmd->parsed()) {
      const gnt::ExperimentConfig cfg = build_config(stream_opts);
      gnt::dump_stream(cfg, stream_opts.seed, stream_steps, stream_out);
      std::cout << "wrote " << stream_out << "\n";
      return 0;
    }
  } catch (const gnt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const gnt::DivergenceError& e) {
    std::cerr << "run failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
