#pragma once

#include <cmath>
#include <vector>

#include "gnt/errors.hpp"
#include "gnt/rng.hpp"
#include "gnt/state_network.hpp"
#include "gnt/td_learner.hpp"
#include "gnt/tester.hpp"

namespace gnt {

struct DeepTraceGeneratorConfig {
  double psi_min = 0.01;  // decay bounds exclude never-decaying / never-remembering traces
  double psi_max = 0.99;
  int generate_per_step = 2;  // g_d

  void validate() const {
    if (!(psi_min > 0.0) || !(psi_max < 1.0) || !(psi_min < psi_max))
      throw ConfigError("psi bounds must satisfy 0 < psi_min < psi_max < 1");
    if (generate_per_step < 0) throw ConfigError("generate_per_step must be non-negative");
  }
};

// Creates deep-trace features: a decay rate drawn uniformly from the psi
// bounds and a source drawn from the live entries of x_t with probability
// proportional to outgoing prediction-weight magnitude (uniform when all
// candidate weights are zero). The new feature's prediction weight starts at
// zero and its utility at the median of its kind.
class DeepTraceGenerator {
 public:
  explicit DeepTraceGenerator(DeepTraceGeneratorConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const DeepTraceGeneratorConfig& config() const { return cfg_; }

  double sample_decay(Rng& rng) const { return rng.uniform(cfg_.psi_min, cfg_.psi_max); }

  // Candidates are the live feature slots plus all observation entries of
  // x_t. Returns -1 when the candidate set is empty (a network with no
  // observations and no live features): generation is skipped, not fatal.
  int select_source(const StateNetwork& net, const TdLearner& learner, Rng& rng) const {
    if (learner.feature_count() != net.feature_slots() || learner.size() < net.input_size())
      throw ConfigError("learner layout does not match the network");
    candidates_.clear();
    const int n = net.feature_slots();
    for (int i = 0; i < n; ++i)
      if (net.slot_live(i)) candidates_.push_back(i);
    for (int j = 0; j < net.num_obs(); ++j) candidates_.push_back(n + j);
    if (candidates_.empty()) return -1;

    double total = 0.0;
    for (int c : candidates_) total += std::abs(learner.weight(c));
    if (total == 0.0) {
      const std::size_t pick =
          rng.uniform_int(0, static_cast<std::uint64_t>(candidates_.size()) - 1);
      return candidates_[pick];
    }
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    for (int c : candidates_) {
      acc += std::abs(learner.weight(c));
      if (u < acc) return c;
    }
    return candidates_.back();  // u == total under rounding
  }

  // Adds min(g_d, free deep-trace capacity) features. Returns the count added.
  int generate(StateNetwork& net, TdLearner& learner, UtilityTester& tester, Rng& rng) const {
    int added = 0;
    for (int k = 0; k < cfg_.generate_per_step; ++k) {
      if (net.live_deep() >= net.capacity_deep()) break;
      const double psi = sample_decay(rng);
      const int source = select_source(net, learner, rng);
      if (source < 0) break;
      const double utility = tester.initial_utility(net, FeatureKind::DeepTrace);
      const int slot = net.add_deep_trace(source, psi);
      if (slot < 0) break;
      learner.reset_weight(slot);
      tester.assign(slot, utility);
      ++added;
    }
    return added;
  }

 private:
  DeepTraceGeneratorConfig cfg_;
  mutable std::vector<int> candidates_;
};

}  // namespace gnt
