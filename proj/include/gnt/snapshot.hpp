#pragma once

#include <json.hpp>

#include "gnt/state_network.hpp"

namespace gnt {

// Structured dump of the live network: per-feature kind, parameters, and
// current activation, plus the implicit recurrent row of each deep trace
// (decay on itself, 1 - decay on its source). Written by the dump-trial CLI
// path; the format is documented in the README.
inline nlohmann::json network_snapshot(const StateNetwork& net) {
  nlohmann::json features = nlohmann::json::array();
  for (int i = 0; i < net.feature_slots(); ++i) {
    if (!net.slot_live(i)) continue;
    const FeatureNode& fn = net.node(i);
    nlohmann::json f{{"slot", i}, {"activation", net.activation(i)}, {"birth", fn.birth}};
    if (fn.kind == FeatureKind::DeepTrace) {
      f["kind"] = "deep-trace";
      f["decay"] = fn.decay;
      f["source_index"] = fn.source_index;
      f["self_weight"] = fn.decay;
      f["source_weight"] = 1.0 - fn.decay;
    } else {
      f["kind"] = "imprinting";
      nlohmann::json conns = nlohmann::json::array();
      for (const ImprintConnection& c : fn.connections)
        conns.push_back({{"obs_index", c.obs_index}, {"weight", c.weight}});
      f["connections"] = conns;
    }
    features.push_back(std::move(f));
  }
  return nlohmann::json{{"capacity_deep", net.capacity_deep()},
                        {"capacity_imprint", net.capacity_imprint()},
                        {"num_obs", net.num_obs()},
                        {"bias", net.bias_enabled()},
                        {"live_deep", net.live_deep()},
                        {"live_imprint", net.live_imprint()},
                        {"features", features}};
}

}  // namespace gnt
