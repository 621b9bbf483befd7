#pragma once

#include <cassert>
#include <cstdint>
#include <utility>
#include <vector>

#include "gnt/errors.hpp"
#include "gnt/observation.hpp"

namespace gnt {

enum class FeatureKind : std::uint8_t { DeepTrace, Imprinting };

// Signed connection of an imprinting feature to one observation signal.
// weight is +1 (signal must be active) or -1 (signal must be inactive).
struct ImprintConnection {
  int obs_index = 0;
  int weight = 0;

  friend bool operator==(const ImprintConnection&, const ImprintConnection&) = default;
};

using ImprintMap = std::vector<ImprintConnection>;  // sorted by obs_index, unique keys

// Metadata of one learned feature. Activations live in a contiguous array in
// StateNetwork so the prediction input can be assembled without a gather.
struct FeatureNode {
  FeatureKind kind = FeatureKind::DeepTrace;
  // deep trace: source into x_t = [s_{t-1}, o_t] and decay psi in (0,1)
  int source_index = -1;
  double decay = 0.0;
  // imprinting: signed observation connections
  ImprintMap connections;
  // monotone creation stamp; smaller = older (used for prune tie-breaks)
  std::uint64_t birth = 0;
};

// The agent-state data model and forward pass.
//
// Layout is fixed per run. Feature slots are preallocated: deep-trace slots
// occupy [0, capacity_deep), imprinting slots [capacity_deep, feature_slots()).
// A deleted feature frees its slot in place, so weight/trace/utility arrays
// indexed by slot stay aligned across generate/prune cycles.
//
// Index spaces:
//   x_t = [s_{t-1} (feature_slots), o_t (num_obs)]          -- input vector
//   f_t = [s_t (feature_slots), o_t (num_obs), bias?]       -- prediction input
// The action segment is always empty in this library.
class StateNetwork {
 public:
  StateNetwork(int capacity_deep, int capacity_imprint, int num_obs, bool bias_enabled = true)
      : capacity_deep_(capacity_deep),
        capacity_imprint_(capacity_imprint),
        num_obs_(num_obs),
        bias_enabled_(bias_enabled),
        nodes_(static_cast<std::size_t>(capacity_deep + capacity_imprint)),
        live_(static_cast<std::size_t>(capacity_deep + capacity_imprint), false),
        activations_(static_cast<std::size_t>(capacity_deep + capacity_imprint), 0.0),
        source_refcount_(static_cast<std::size_t>(capacity_deep + capacity_imprint), 0) {
    if (capacity_deep < 0 || capacity_imprint < 0)
      throw ConfigError("feature capacities must be non-negative");
    if (num_obs < 0) throw ConfigError("observation count must be non-negative");
  }

  int capacity_deep() const { return capacity_deep_; }
  int capacity_imprint() const { return capacity_imprint_; }
  int num_obs() const { return num_obs_; }
  bool bias_enabled() const { return bias_enabled_; }

  int feature_slots() const { return capacity_deep_ + capacity_imprint_; }
  int input_size() const { return feature_slots() + num_obs_; }
  int prediction_size() const { return input_size() + (bias_enabled_ ? 1 : 0); }
  int obs_offset() const { return feature_slots(); }

  bool slot_live(int slot) const { return live_[static_cast<std::size_t>(slot)]; }
  const FeatureNode& node(int slot) const { return nodes_[static_cast<std::size_t>(slot)]; }
  double activation(int slot) const { return activations_[static_cast<std::size_t>(slot)]; }
  const std::vector<double>& activations() const { return activations_; }
  int source_refcount(int slot) const { return source_refcount_[static_cast<std::size_t>(slot)]; }

  int live_count(FeatureKind kind) const {
    return kind == FeatureKind::DeepTrace ? live_deep_ : live_imprint_;
  }
  int live_deep() const { return live_deep_; }
  int live_imprint() const { return live_imprint_; }

  // x_t = [s_{t-1}, o_t]. Call before compute_state, while activations still
  // hold the previous step's values.
  void build_input(const Observation& obs, std::vector<double>& x) const {
    if (static_cast<int>(obs.signals.size()) != num_obs_)
      throw ConfigError("observation has " + std::to_string(obs.signals.size()) +
                        " signals, network expects " + std::to_string(num_obs_));
    x.resize(static_cast<std::size_t>(input_size()));
    const int n = feature_slots();
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = activations_[static_cast<std::size_t>(i)];
    for (int j = 0; j < num_obs_; ++j)
      x[static_cast<std::size_t>(n + j)] = obs.signals[static_cast<std::size_t>(j)];
  }

  // s_t from x_t and o_t. Deep traces read their source from x_t (previous
  // feature values, current observations), so slot evaluation order cannot
  // affect the result. Imprinting features are LTUs over the current
  // observation: 1 iff sum_j V[i,j] * o_j >= sum_j V[i,j].
  void compute_state(const std::vector<double>& x, const Observation& obs) {
    if (static_cast<int>(x.size()) != input_size())
      throw ConfigError("input vector length " + std::to_string(x.size()) +
                        " does not match network input size " + std::to_string(input_size()));
    const int n = feature_slots();
    for (int i = 0; i < n; ++i) {
      if (!live_[static_cast<std::size_t>(i)]) continue;
      const FeatureNode& fn = nodes_[static_cast<std::size_t>(i)];
      if (fn.kind == FeatureKind::DeepTrace) {
        assert(fn.source_index >= 0 && fn.source_index < input_size());
        activations_[static_cast<std::size_t>(i)] =
            fn.decay * activations_[static_cast<std::size_t>(i)] +
            (1.0 - fn.decay) * x[static_cast<std::size_t>(fn.source_index)];
      } else {
        activations_[static_cast<std::size_t>(i)] = ltu_activation(fn.connections, obs) ? 1.0 : 0.0;
      }
    }
  }

  // f_t = [s_t, o_t, bias?]. Call after compute_state.
  void build_prediction_input(const Observation& obs, std::vector<double>& f) const {
    f.resize(static_cast<std::size_t>(prediction_size()));
    const int n = feature_slots();
    for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = activations_[static_cast<std::size_t>(i)];
    for (int j = 0; j < num_obs_; ++j)
      f[static_cast<std::size_t>(n + j)] = obs.signals[static_cast<std::size_t>(j)];
    if (bias_enabled_) f[static_cast<std::size_t>(n + num_obs_)] = 1.0;
  }

  static bool ltu_activation(const ImprintMap& connections, const Observation& obs) {
    double weighted = 0.0;
    double threshold = 0.0;
    for (const ImprintConnection& c : connections) {
      weighted += c.weight * obs.signals[static_cast<std::size_t>(c.obs_index)];
      threshold += c.weight;
    }
    return weighted >= threshold;
  }

  // Adds a deep trace with activation 0 (it first contributes on the step
  // after creation). Returns the slot, or -1 when the kind is at capacity.
  // The source must resolve to a live feature or an observation entry.
  int add_deep_trace(int source_index, double decay) {
    if (source_index < 0 || source_index >= input_size())
      throw ContractViolation("deep trace source index out of range");
    if (decay <= 0.0 || decay >= 1.0)
      throw ContractViolation("deep trace decay must be in (0,1)");
    if (source_index < feature_slots() && !slot_live(source_index))
      throw ContractViolation("deep trace source is not a live feature");
    const int slot = free_slot(FeatureKind::DeepTrace);
    if (slot < 0) return -1;
    FeatureNode& fn = nodes_[static_cast<std::size_t>(slot)];
    fn.kind = FeatureKind::DeepTrace;
    fn.source_index = source_index;
    fn.decay = decay;
    fn.connections.clear();
    fn.birth = next_birth_++;
    live_[static_cast<std::size_t>(slot)] = true;
    activations_[static_cast<std::size_t>(slot)] = 0.0;
    ++live_deep_;
    if (source_index < feature_slots()) ++source_refcount_[static_cast<std::size_t>(source_index)];
    return slot;
  }

  bool imprint_exists(const ImprintMap& connections) const {
    const int n = feature_slots();
    for (int i = capacity_deep_; i < n; ++i) {
      if (live_[static_cast<std::size_t>(i)] &&
          nodes_[static_cast<std::size_t>(i)].connections == connections)
        return true;
    }
    return false;
  }

  // Adds an imprinting feature unless a live one already has the same
  // connection map or the kind is at capacity. Activation is computed
  // immediately; by construction it is 1 on the creating observation.
  int add_imprint(ImprintMap connections, const Observation& obs) {
    if (connections.empty()) throw ContractViolation("imprint connection map is empty");
    for (std::size_t k = 0; k + 1 < connections.size(); ++k) {
      if (connections[k].obs_index >= connections[k + 1].obs_index)
        throw ContractViolation("imprint connections must be sorted with unique indices");
    }
    if (imprint_exists(connections)) return -1;
    const int slot = free_slot(FeatureKind::Imprinting);
    if (slot < 0) return -1;
    FeatureNode& fn = nodes_[static_cast<std::size_t>(slot)];
    fn.kind = FeatureKind::Imprinting;
    fn.source_index = -1;
    fn.decay = 0.0;
    fn.connections = std::move(connections);
    fn.birth = next_birth_++;
    live_[static_cast<std::size_t>(slot)] = true;
    activations_[static_cast<std::size_t>(slot)] = ltu_activation(fn.connections, obs) ? 1.0 : 0.0;
    ++live_imprint_;
    return slot;
  }

  // Frees a slot. Rejects removal of any feature that is still the source of
  // a live deep trace; the tester never selects those.
  void remove(int slot) {
    if (slot < 0 || slot >= feature_slots() || !live_[static_cast<std::size_t>(slot)])
      throw ContractViolation("remove: slot is not a live feature");
    if (source_refcount_[static_cast<std::size_t>(slot)] != 0)
      throw ContractViolation("remove: feature is the source of a live deep trace");
    FeatureNode& fn = nodes_[static_cast<std::size_t>(slot)];
    if (fn.kind == FeatureKind::DeepTrace) {
      if (fn.source_index < feature_slots())
        --source_refcount_[static_cast<std::size_t>(fn.source_index)];
      --live_deep_;
    } else {
      --live_imprint_;
    }
    fn.connections.clear();
    fn.source_index = -1;
    live_[static_cast<std::size_t>(slot)] = false;
    activations_[static_cast<std::size_t>(slot)] = 0.0;
  }

 private:
  int free_slot(FeatureKind kind) const {
    const int lo = kind == FeatureKind::DeepTrace ? 0 : capacity_deep_;
    const int hi = kind == FeatureKind::DeepTrace ? capacity_deep_ : feature_slots();
    for (int i = lo; i < hi; ++i)
      if (!live_[static_cast<std::size_t>(i)]) return i;
    return -1;
  }

  int capacity_deep_;
  int capacity_imprint_;
  int num_obs_;
  bool bias_enabled_;

  std::vector<FeatureNode> nodes_;
  std::vector<bool> live_;
  std::vector<double> activations_;
  std::vector<int> source_refcount_;
  int live_deep_ = 0;
  int live_imprint_ = 0;
  std::uint64_t next_birth_ = 0;
};

}  // namespace gnt
