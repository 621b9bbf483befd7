#pragma once

#include <cassert>
#include <cmath>
#include <span>
#include <vector>

#include "gnt/errors.hpp"
#include "gnt/observation.hpp"
#include "gnt/rng.hpp"
#include "gnt/state_network.hpp"
#include "gnt/td_learner.hpp"
#include "gnt/tester.hpp"

namespace gnt {

struct ImprintingGeneratorConfig {
  int generate_per_step = 2;   // g_i candidate nodes per active step
  int excluded_obs_index = -1; // usually the US signal; -1 disables exclusion

  void validate() const {
    if (generate_per_step < 0) throw ConfigError("generate_per_step must be non-negative");
  }
};

// Creates LTU features imprinted on the current observation configuration.
// Participant signals are chosen by relative prediction-weight magnitude with
// additive Gaussian noise:
//
//   include signal i  iff  |w_{n+i}| / sum_j |w_{n+j}| >= 1/m + eps_i,
//   eps_i ~ Normal(0, 1/m) drawn independently per signal per call.
//
// A zero denominator makes the ratio 1/m for every signal, so cold-start
// selection is pure noise (each signal included with probability 1/2).
// Selected signals connect with +1 when currently active and -1 when
// inactive, so the new feature fires on the imprinted configuration and is
// active at the moment of creation. Duplicate connection maps and empty
// selections are dropped without retry.
class ImprintingGenerator {
 public:
  explicit ImprintingGenerator(ImprintingGeneratorConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const ImprintingGeneratorConfig& config() const { return cfg_; }

  static bool should_generate(const Observation& obs) { return obs.any_active(); }

  // Deterministic core of the selection rule; noise is supplied by the
  // caller. obs_weights spans the observation segment of w, noise has one
  // entry per signal. An excluded signal (the US by default) is not a
  // candidate at all: it is skipped, leaves the normalizing sum, and does
  // not count toward m in the 1/m share.
  static std::vector<int> select_observations(std::span<const double> obs_weights,
                                              std::span<const double> noise,
                                              int excluded_obs_index = -1) {
    const int m = static_cast<int>(obs_weights.size());
    std::vector<int> selected;
    const int candidates =
        m - (excluded_obs_index >= 0 && excluded_obs_index < m ? 1 : 0);
    if (candidates <= 0) return selected;
    double total = 0.0;
    for (int i = 0; i < m; ++i)
      if (i != excluded_obs_index) total += std::abs(obs_weights[static_cast<std::size_t>(i)]);
    const double uniform_share = 1.0 / static_cast<double>(candidates);
    for (int i = 0; i < m; ++i) {
      if (i == excluded_obs_index) continue;
      const double share =
          total == 0.0 ? uniform_share : std::abs(obs_weights[static_cast<std::size_t>(i)]) / total;
      if (share >= uniform_share + noise[static_cast<std::size_t>(i)]) selected.push_back(i);
    }
    return selected;
  }

  std::vector<int> select_observations(const StateNetwork& net, const TdLearner& learner,
                                       Rng& rng) const {
    if (learner.feature_count() != net.feature_slots() || learner.size() < net.input_size())
      throw ConfigError("learner layout does not match the network");
    const int m = net.num_obs();
    const int candidates =
        m - (cfg_.excluded_obs_index >= 0 && cfg_.excluded_obs_index < m ? 1 : 0);
    noise_.resize(static_cast<std::size_t>(m));
    const double stddev =
        candidates > 0 ? 1.0 / static_cast<double>(candidates) : 0.0;  // PROBE-B
    for (int i = 0; i < m; ++i) noise_[static_cast<std::size_t>(i)] = rng.normal(0.0, stddev);
    const std::span<const double> obs_weights(learner.weights().data() + net.obs_offset(),
                                              static_cast<std::size_t>(m));
    return select_observations(obs_weights, noise_, cfg_.excluded_obs_index);
  }

  static ImprintMap make_imprint(const Observation& obs, const std::vector<int>& selected) {
    ImprintMap connections;
    connections.reserve(selected.size());
    for (int i : selected) {
      connections.push_back(
          {i, obs.signals[static_cast<std::size_t>(i)] == 1.0 ? +1 : -1});
    }
    return connections;
  }

  // Draws g_i candidates against the current observation; duplicates and
  // empty selections are dropped. Returns the count actually added.
  int generate(StateNetwork& net, TdLearner& learner, UtilityTester& tester,
               const Observation& obs, Rng& rng) const {
    if (!should_generate(obs)) return 0;
    int added = 0;
    for (int k = 0; k < cfg_.generate_per_step; ++k) {
      if (net.live_imprint() >= net.capacity_imprint()) break;
      const std::vector<int> selected = select_observations(net, learner, rng);
      if (selected.empty()) continue;
      ImprintMap connections = make_imprint(obs, selected);
      const double utility = tester.initial_utility(net, FeatureKind::Imprinting);
      const int slot = net.add_imprint(std::move(connections), obs);
      if (slot < 0) continue;  // duplicate of a live feature
      assert(net.activation(slot) == 1.0);
      learner.reset_weight(slot);
      tester.assign(slot, utility);
      ++added;
    }
    return added;
  }

 private:
  ImprintingGeneratorConfig cfg_;
  mutable std::vector<double> noise_;
};

}  // namespace gnt
