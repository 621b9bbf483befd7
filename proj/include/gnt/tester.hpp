#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gnt/errors.hpp"
#include "gnt/state_network.hpp"
#include "gnt/td_learner.hpp"

namespace gnt {

// Tracks per-feature utility as an exponential moving average of prediction
// weight magnitude and picks the least useful unprotected features for
// deletion. Utilities exist only for feature slots; observation weights are
// never ranked or pruned.
//
// A newly created feature starts at the median utility of its kind, which is
// what protects it from immediate deletion: it enters above every feature in
// the bottom half of the ranking.
class UtilityTester {
 public:
  UtilityTester(int feature_slots, double decay)
      : decay_(decay), utilities_(static_cast<std::size_t>(feature_slots), 0.0) {
    if (decay <= 0.0 || decay >= 1.0) throw ConfigError("utility decay must be in (0,1)");
  }

  double decay() const { return decay_; }
  double utility(int slot) const { return utilities_[static_cast<std::size_t>(slot)]; }
  const std::vector<double>& values() const { return utilities_; }

  // u_i <- mu * u_i + (1 - mu) * |w_i| for every live feature. Call once per
  // step, after the TD update.
  void update(const StateNetwork& net, const TdLearner& learner) {
    const int n = net.feature_slots();
    for (int i = 0; i < n; ++i) {
      if (!net.slot_live(i)) continue;
      const std::size_t k = static_cast<std::size_t>(i);
      utilities_[k] = decay_ * utilities_[k] + (1.0 - decay_) * std::abs(learner.weight(i));
    }
  }

  // Median utility over live features of the kind; 0 when none exist. Even
  // counts take the mean of the middle two.
  double initial_utility(const StateNetwork& net, FeatureKind kind) const {
    scratch_.clear();
    const int n = net.feature_slots();
    for (int i = 0; i < n; ++i) {
      if (net.slot_live(i) && net.node(i).kind == kind)
        scratch_.push_back(utilities_[static_cast<std::size_t>(i)]);
    }
    if (scratch_.empty()) return 0.0;
    std::sort(scratch_.begin(), scratch_.end());
    const std::size_t mid = scratch_.size() / 2;
    if (scratch_.size() % 2 == 1) return scratch_[mid];
    return 0.5 * (scratch_[mid - 1] + scratch_[mid]);
  }

  void assign(int slot, double value) { utilities_[static_cast<std::size_t>(slot)] = value; }
  void clear(int slot) { utilities_[static_cast<std::size_t>(slot)] = 0.0; }

  // Up to max_remove slots of the given kind, drawn in ascending utility
  // order from the bottom (1 - keep_fraction) of the kind's ranking,
  // skipping features that are the source of a live deep trace. Ties rank
  // older features first. Pruning applies only at capacity; below capacity
  // the result is empty.
  std::vector<int> select_prunable(const StateNetwork& net, FeatureKind kind,
                                   double keep_fraction, int max_remove) const {
    std::vector<int> result;
    const int capacity =
        kind == FeatureKind::DeepTrace ? net.capacity_deep() : net.capacity_imprint();
    if (net.live_count(kind) < capacity || max_remove <= 0) return result;

    ranking_.clear();
    const int n = net.feature_slots();
    for (int i = 0; i < n; ++i) {
      if (net.slot_live(i) && net.node(i).kind == kind) ranking_.push_back(i);
    }
    std::sort(ranking_.begin(), ranking_.end(), [&](int a, int b) {
      const double ua = utilities_[static_cast<std::size_t>(a)];
      const double ub = utilities_[static_cast<std::size_t>(b)];
      if (ua != ub) return ua < ub;
      return net.node(a).birth < net.node(b).birth;
    });

    const std::size_t bottom =
        static_cast<std::size_t>((1.0 - keep_fraction) * static_cast<double>(ranking_.size()));
    for (std::size_t r = 0; r < bottom && static_cast<int>(result.size()) < max_remove; ++r) {
      const int slot = ranking_[r];
      if (net.source_refcount(slot) == 0) result.push_back(slot);
    }
    return result;
  }

 private:
  double decay_;
  std::vector<double> utilities_;
  mutable std::vector<double> scratch_;
  mutable std::vector<int> ranking_;
};

}  // namespace gnt
