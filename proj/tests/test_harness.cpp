#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gnt/config.hpp"
#include "gnt/harness.hpp"

using gnt::ExperimentConfig;
using gnt::Problem;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gnt_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig tiny_tc() {
  ExperimentConfig cfg = gnt::preset("tc-isi10");
  cfg.trials = 30;
  cfg.agent.capacity_deep = 20;
  cfg.resolve();
  return cfg;
}

}  // namespace

TEST_CASE("presets resolve the documented hyper-parameters") {
  const ExperimentConfig tc = gnt::preset("tc-isi10");
  CHECK(tc.problem == Problem::TraceConditioning);
  CHECK(tc.agent.learner.gamma == Catch::Approx(0.9));
  CHECK(tc.agent.learner.lambda == 0.9);
  CHECK(tc.agent.learner.alpha0 == 0.01);
  CHECK(tc.agent.learner.theta == 0.01);
  CHECK(tc.agent.capacity_deep == 100);
  CHECK(tc.agent.generate_deep == 2);
  CHECK(tc.agent.prune_deep == 2);
  CHECK_FALSE(tc.agent.imprinting_enabled);
  CHECK(tc.agent.imprint_excluded_obs == tc.tc.us_index());

  CHECK(gnt::preset("tc-isi20").agent.capacity_deep == 200);
  CHECK(gnt::preset("tc-isi20").agent.learner.gamma == Catch::Approx(0.95));
  CHECK(gnt::preset("tc-isi30").agent.capacity_deep == 300);

  const ExperimentConfig tp = gnt::preset("tp");
  CHECK(tp.problem == Problem::TracePatterning);
  CHECK(tp.agent.capacity_deep == 200);
  CHECK(tp.agent.capacity_imprint == 60);
  CHECK(tp.agent.learner.gamma == Catch::Approx(0.9));
  CHECK(tp.agent.imprinting_enabled);

  const ExperimentConfig presence = gnt::preset("presence");
  CHECK_FALSE(presence.agent.deep_trace_enabled);
  CHECK_FALSE(presence.agent.imprinting_enabled);
  CHECK(presence.agent.capacity_deep == 0);

  CHECK_THROWS_AS(gnt::preset("nope"), gnt::ConfigError);
}

TEST_CASE("config files load, validate, and reject unknown keys") {
  const fs::path dir = temp_dir("config");
  {
    std::ofstream out(dir / "good.json");
    out << R"({"preset": "tc-isi10", "trials": 50, "agent": {"alpha0": 0.02}})";
  }
  const ExperimentConfig cfg = gnt::load_config_file((dir / "good.json").string());
  CHECK(cfg.trials == 50);
  CHECK(cfg.agent.learner.alpha0 == 0.02);
  CHECK(cfg.agent.capacity_deep == 100);  // preset value survives

  {
    std::ofstream out(dir / "bad_key.json");
    out << R"({"preset": "tc-isi10", "agent": {"alpha_zero": 0.02}})";
  }
  try {
    gnt::load_config_file((dir / "bad_key.json").string());
    FAIL("expected ConfigError");
  } catch (const gnt::ConfigError& e) {
    CHECK(std::string(e.what()).find("alpha_zero") != std::string::npos);
  }

  {
    std::ofstream out(dir / "bad_value.json");
    out << R"({"preset": "tc-isi10", "agent": {"alpha0": -3}})";
  }
  CHECK_THROWS_AS(gnt::load_config_file((dir / "bad_value.json").string()), gnt::ConfigError);

  CHECK_THROWS_AS(gnt::load_config_file((dir / "missing.json").string()), gnt::ConfigError);
}

TEST_CASE("overrides rewrite nested fields") {
  ExperimentConfig cfg = gnt::preset("tc-isi10");
  gnt::apply_override(cfg, "agent.alpha0=0.05");
  CHECK(cfg.agent.learner.alpha0 == 0.05);
  gnt::apply_override(cfg, "trials=123");
  CHECK(cfg.trials == 123);
  gnt::apply_override(cfg, "env.isi=20");
  CHECK(cfg.tc.isi == 20);
  CHECK(cfg.agent.learner.gamma == Catch::Approx(0.95));  // discount follows the ISI
  CHECK_THROWS_AS(gnt::apply_override(cfg, "nonsense"), gnt::ConfigError);
  CHECK_THROWS_AS(gnt::apply_override(cfg, "agent.bogus=1"), gnt::ConfigError);
}

TEST_CASE("run_experiment writes runs, aggregate, config, and manifest") {
  const ExperimentConfig cfg = tiny_tc();
  const fs::path dir = temp_dir("experiment");
  REQUIRE(gnt::run_experiment(cfg, 42, 3, dir, 1));

  CHECK(fs::exists(dir / "config.json"));
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "aggregate.csv"));
  for (const char* name : {"run_000.csv", "run_001.csv", "run_002.csv"})
    CHECK(fs::exists(dir / name));

  const std::string aggregate = slurp(dir / "aggregate.csv");
  CHECK(aggregate.rfind("bin_index,msre_mean,msre_stderr,n_runs\n", 0) == 0);
  const std::string run0 = slurp(dir / "run_000.csv");
  CHECK(run0.rfind("bin_index,steps,msre\n", 0) == 0);

  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("master_seed") == 42);
  CHECK(manifest.at("runs").size() == 3);
  CHECK(manifest.at("runs")[0].at("ok") == true);
  CHECK(manifest.at("runs")[0].at("seed") == gnt::run_seed_for(42, 0));
  CHECK(manifest.at("config").at("agent").at("capacity_deep") == 20);
}

TEST_CASE("identical (config, seed) reruns are byte-identical") {
  const ExperimentConfig cfg = tiny_tc();
  const fs::path a = temp_dir("rerun_a");
  const fs::path b = temp_dir("rerun_b");
  REQUIRE(gnt::run_experiment(cfg, 7, 2, a, 1));
  REQUIRE(gnt::run_experiment(cfg, 7, 2, b, 1));
  for (const char* name : {"aggregate.csv", "run_000.csv", "run_001.csv", "manifest.json"})
    REQUIRE(slurp(a / name) == slurp(b / name));
}

TEST_CASE("parallel and sequential execution produce identical outputs") {
  const ExperimentConfig cfg = tiny_tc();
  const fs::path seq = temp_dir("seq");
  const fs::path par = temp_dir("par");
  REQUIRE(gnt::run_experiment(cfg, 21, 4, seq, 1));
  REQUIRE(gnt::run_experiment(cfg, 21, 4, par, 4));
  for (const char* name : {"aggregate.csv", "run_000.csv", "run_003.csv", "manifest.json"})
    REQUIRE(slurp(seq / name) == slurp(par / name));
}

TEST_CASE("different master seeds change the results") {
  const ExperimentConfig cfg = tiny_tc();
  const fs::path a = temp_dir("seed_a");
  const fs::path b = temp_dir("seed_b");
  REQUIRE(gnt::run_experiment(cfg, 1, 1, a, 1));
  REQUIRE(gnt::run_experiment(cfg, 2, 1, b, 1));
  CHECK(slurp(a / "run_000.csv") != slurp(b / "run_000.csv"));
}

TEST_CASE("dump_trial writes an untrained trial with near-zero predictions") {
  ExperimentConfig cfg = tiny_tc();
  cfg.trials = 5;
  const fs::path dir = temp_dir("trial0");
  const fs::path csv = gnt::dump_trial(cfg, 3, 0, dir);
  CHECK(fs::exists(dir / "network.json"));

  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "step,cs,d1,d2,d3,d4,d5,d6,d7,d8,d9,d10,us,cumulant,prediction,return,td_error");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    // prediction is the 15th column
    std::istringstream ss(line);
    std::string field;
    for (int i = 0; i < 15; ++i) std::getline(ss, field, ',');
    CHECK(std::abs(std::stod(field)) < 0.2);  // barely trained after <= 1 trial
    ++rows;
  }
  CHECK(rows > 10);

  CHECK_THROWS_AS(gnt::dump_trial(cfg, 3, 99, dir), gnt::ConfigError);
}

TEST_CASE("dump_stream is deterministic and binary") {
  const ExperimentConfig cfg = tiny_tc();
  const fs::path dir = temp_dir("stream");
  gnt::dump_stream(cfg, 5, 500, dir / "a.csv");
  gnt::dump_stream(cfg, 5, 500, dir / "b.csv");
  REQUIRE(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  const std::string body = slurp(dir / "a.csv");
  CHECK(body.rfind("step,cs,", 0) == 0);
}

TEST_CASE("diverged runs are marked failed in the manifest") {
  ExperimentConfig cfg = tiny_tc();
  cfg.trials = 5;
  cfg.tc.us_value = 1e308;  // overflows the weight update within a trial
  cfg.resolve();
  const fs::path dir = temp_dir("diverged");
  REQUIRE_FALSE(gnt::run_experiment(cfg, 9, 2, dir, 1));  // every run fails
  CHECK_FALSE(fs::exists(dir / "aggregate.csv"));
  CHECK_FALSE(fs::exists(dir / "run_000.csv"));
  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  REQUIRE(manifest.at("runs").size() == 2);
  for (const auto& run : manifest.at("runs")) {
    CHECK(run.at("ok") == false);
    CHECK(run.at("error").get<std::string>().find("divergence") != std::string::npos);
  }
}

TEST_CASE("healthy runs report ok with no error") {
  const ExperimentConfig cfg = tiny_tc();
  const fs::path dir = temp_dir("ok_flag");
  REQUIRE(gnt::run_experiment(cfg, 9, 2, dir, 1));
  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  for (const auto& run : manifest.at("runs")) {
    CHECK(run.at("ok") == true);
    CHECK(run.at("error") == "");
  }
}
