#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gnt/deep_trace_generator.hpp"
#include "gnt/errors.hpp"
#include "gnt/imprinting_generator.hpp"
#include "gnt/observation.hpp"
#include "gnt/rng.hpp"
#include "gnt/state_network.hpp"
#include "gnt/td_learner.hpp"
#include "gnt/tester.hpp"

namespace gnt {

struct AgentConfig {
  LearnerConfig learner;

  int capacity_deep = 100;    // c_d
  int generate_deep = 2;      // g_d
  int prune_deep = 2;         // r_d
  int capacity_imprint = 0;   // c_i
  int generate_imprint = 2;   // g_i
  int prune_imprint = 2;      // r_i

  double utility_decay = 0.999;         // mu
  double keep_fraction_deep = 0.5;      // p_d
  double keep_fraction_imprint = 0.5;   // p_i
  double psi_min = 0.01;
  double psi_max = 0.99;

  bool bias = true;
  bool deep_trace_enabled = true;
  bool imprinting_enabled = false;
  int imprint_excluded_obs = -1;  // usually the US index

  void validate() const {
    learner.validate();
    if (capacity_deep < 0) throw ConfigError("capacity_deep must be non-negative");
    if (capacity_imprint < 0) throw ConfigError("capacity_imprint must be non-negative");
    if (generate_deep < 0) throw ConfigError("generate_deep must be non-negative");
    if (prune_deep < 0) throw ConfigError("prune_deep must be non-negative");
    if (generate_imprint < 0) throw ConfigError("generate_imprint must be non-negative");
    if (prune_imprint < 0) throw ConfigError("prune_imprint must be non-negative");
    if (utility_decay <= 0.0 || utility_decay >= 1.0) throw ConfigError("utility_decay must be in (0,1)");
    if (keep_fraction_deep < 0.0 || keep_fraction_deep > 1.0) throw ConfigError("keep_fraction_deep must be in [0,1]");
    if (keep_fraction_imprint < 0.0 || keep_fraction_imprint > 1.0) throw ConfigError("keep_fraction_imprint must be in [0,1]");
    if (!(psi_min > 0.0) || !(psi_max < 1.0) || !(psi_min < psi_max))
      throw ConfigError("psi bounds must satisfy 0 < psi_min < psi_max < 1");
  }
};

struct StepRecord {
  double prediction = 0.0;
  double td_error = 0.0;
  int live_deep = 0;
  int live_imprint = 0;
  int generated_deep = 0;
  int generated_imprint = 0;
  int pruned_deep = 0;
  int pruned_imprint = 0;
};

// The full per-step loop:
//
//   1. imprint generation on observation activity (new features see y_t)
//   2. state update s_t = u(s_{t-1}, o_t)
//   3. prediction y_t = f_t.w
//   4. TD(lambda) + step-size update with c_t as cumulant
//   5. utility update
//   6. deep-trace generation up to capacity (activations start at 0, so a
//      trace created at step t first influences y_{t+1})
//   7. prune each kind that is at capacity, resetting removed slots
//
// Starts with no features; (config, seed) fully determines every prediction.
class Agent {
 public:
  Agent(AgentConfig cfg, int num_obs, std::uint64_t seed)
      : cfg_(validated(std::move(cfg))),
        net_(cfg_.capacity_deep, cfg_.capacity_imprint, num_obs, cfg_.bias),
        learner_(cfg_.learner, net_.feature_slots(), num_obs, cfg_.bias),
        tester_(net_.feature_slots(), cfg_.utility_decay),
        deep_gen_({cfg_.psi_min, cfg_.psi_max, cfg_.generate_deep}),
        imprint_gen_({cfg_.generate_imprint, cfg_.imprint_excluded_obs}),
        rng_(seed),
        f_prev_(static_cast<std::size_t>(net_.prediction_size()), 0.0) {}

  const AgentConfig& config() const { return cfg_; }
  const StateNetwork& network() const { return net_; }
  const TdLearner& learner() const { return learner_; }
  const UtilityTester& tester() const { return tester_; }
  std::uint64_t steps_done() const { return steps_; }

  double utility_median(FeatureKind kind) const { return tester_.initial_utility(net_, kind); }

  StepRecord step(const Observation& obs) {
    StepRecord rec;

    if (cfg_.imprinting_enabled && ImprintingGenerator::should_generate(obs))
      rec.generated_imprint = imprint_gen_.generate(net_, learner_, tester_, obs, rng_);

    net_.build_input(obs, x_);
    net_.compute_state(x_, obs);
    net_.build_prediction_input(obs, f_curr_);

    rec.prediction = learner_.predict(f_curr_);
    rec.td_error = learner_.td_step(f_prev_, f_curr_, obs.cumulant);

    tester_.update(net_, learner_);

    if (cfg_.deep_trace_enabled)
      rec.generated_deep = deep_gen_.generate(net_, learner_, tester_, rng_);

    rec.pruned_deep = prune(FeatureKind::DeepTrace, cfg_.keep_fraction_deep, cfg_.prune_deep);
    rec.pruned_imprint =
        prune(FeatureKind::Imprinting, cfg_.keep_fraction_imprint, cfg_.prune_imprint);

    rec.live_deep = net_.live_deep();
    rec.live_imprint = net_.live_imprint();
    f_prev_.swap(f_curr_);
    ++steps_;
    return rec;
  }

 private:
  static AgentConfig validated(AgentConfig cfg) {
    cfg.validate();
    return cfg;
  }

  int prune(FeatureKind kind, double keep_fraction, int max_remove) {
    const std::vector<int> victims = tester_.select_prunable(net_, kind, keep_fraction, max_remove);
    for (int slot : victims) {
      net_.remove(slot);
      learner_.reset_weight(slot);
      tester_.clear(slot);
    }
    return static_cast<int>(victims.size());
  }

  AgentConfig cfg_;
  StateNetwork net_;
  TdLearner learner_;
  UtilityTester tester_;
  DeepTraceGenerator deep_gen_;
  ImprintingGenerator imprint_gen_;
  Rng rng_;

  std::vector<double> x_;
  std::vector<double> f_prev_;
  std::vector<double> f_curr_;
  std::uint64_t steps_ = 0;
};

}  // namespace gnt
