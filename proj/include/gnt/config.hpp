#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "gnt/agent.hpp"
#include "gnt/env/trace_conditioning.hpp"
#include "gnt/env/trace_patterning.hpp"
#include "gnt/errors.hpp"

namespace gnt {

enum class Problem { TraceConditioning, TracePatterning };

inline std::string to_string(Problem p) {
  return p == Problem::TraceConditioning ? "trace-conditioning" : "trace-patterning";
}

// Everything one run needs: the problem, its parameters, the agent
// hyper-parameters, and the run length. resolve() fills derived values
// (discount from the problem, US exclusion for imprinting) and validates.
struct ExperimentConfig {
  Problem problem = Problem::TraceConditioning;
  TraceConditioningConfig tc;
  TracePatterningConfig tp;
  AgentConfig agent;
  std::uint64_t trials = 20000;
  std::size_t bin_size = 1000;

  // negative sentinel: take the problem's default discount in resolve()
  double gamma_override = -1.0;

  int num_signals() const {
    return problem == Problem::TraceConditioning ? tc.num_signals() : tp.num_signals();
  }
  int us_index() const {
    return problem == Problem::TraceConditioning ? tc.us_index() : tp.us_index();
  }
  double us_value() const {
    return problem == Problem::TraceConditioning ? tc.us_value : tp.us_value;
  }

  void resolve() {
    if (problem == Problem::TraceConditioning)
      tc.validate();
    else
      tp.validate();
    agent.learner.gamma = gamma_override >= 0.0
                              ? gamma_override
                              : (problem == Problem::TraceConditioning ? tc.default_gamma()
                                                                       : tp.default_gamma());
    agent.imprint_excluded_obs = us_index();
    agent.validate();
    if (trials == 0) throw ConfigError("trials must be positive");
    if (bin_size == 0) throw ConfigError("bin_size must be positive");
  }

  // Generous bound on the step count of a full run; the run loop treats
  // exceeding it as an internal error.
  std::uint64_t max_steps() const {
    const std::uint64_t per_trial = static_cast<std::uint64_t>(
        (problem == Problem::TraceConditioning ? tc.isi + tc.iti_max : tp.isi + tp.iti_max) + 4);
    return trials * per_trial + 1024;
  }
};

namespace detail {

inline void expect_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                        const std::string& scope) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError("unknown config key: " + scope + it.key());
  }
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& out, const std::string& scope) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config field " + scope + key + " has the wrong type");
  }
}

}  // namespace detail

inline void from_json(const nlohmann::json& j, TraceConditioningConfig& c) {
  detail::expect_keys(j,
                      {"isi", "cs_duration", "us_duration", "iti_min", "iti_max",
                       "num_distractors", "distractor_duration", "us_in_observation", "us_value"},
                      "env.");
  detail::read(j, "isi", c.isi, "env.");
  detail::read(j, "cs_duration", c.cs_duration, "env.");
  detail::read(j, "us_duration", c.us_duration, "env.");
  detail::read(j, "iti_min", c.iti_min, "env.");
  detail::read(j, "iti_max", c.iti_max, "env.");
  detail::read(j, "num_distractors", c.num_distractors, "env.");
  detail::read(j, "distractor_duration", c.distractor_duration, "env.");
  detail::read(j, "us_in_observation", c.us_in_observation, "env.");
  detail::read(j, "us_value", c.us_value, "env.");
}

inline void to_json(nlohmann::json& j, const TraceConditioningConfig& c) {
  j = nlohmann::json{{"isi", c.isi},
                     {"cs_duration", c.cs_duration},
                     {"us_duration", c.us_duration},
                     {"iti_min", c.iti_min},
                     {"iti_max", c.iti_max},
                     {"num_distractors", c.num_distractors},
                     {"distractor_duration", c.distractor_duration},
                     {"us_in_observation", c.us_in_observation},
                     {"us_value", c.us_value}};
}

inline void from_json(const nlohmann::json& j, TracePatterningConfig& c) {
  detail::expect_keys(j,
                      {"num_cs", "pattern_active", "num_distractors", "stimulus_duration", "isi",
                       "us_duration", "iti_min", "iti_max", "pattern_rate", "distractor_prob",
                       "distractors_per_step", "us_in_observation", "us_value"},
                      "env.");
  detail::read(j, "num_cs", c.num_cs, "env.");
  detail::read(j, "pattern_active", c.pattern_active, "env.");
  detail::read(j, "num_distractors", c.num_distractors, "env.");
  detail::read(j, "stimulus_duration", c.stimulus_duration, "env.");
  detail::read(j, "isi", c.isi, "env.");
  detail::read(j, "us_duration", c.us_duration, "env.");
  detail::read(j, "iti_min", c.iti_min, "env.");
  detail::read(j, "iti_max", c.iti_max, "env.");
  detail::read(j, "pattern_rate", c.pattern_rate, "env.");
  detail::read(j, "distractor_prob", c.distractor_prob, "env.");
  detail::read(j, "distractors_per_step", c.distractors_per_step, "env.");
  detail::read(j, "us_in_observation", c.us_in_observation, "env.");
  detail::read(j, "us_value", c.us_value, "env.");
}

inline void to_json(nlohmann::json& j, const TracePatterningConfig& c) {
  j = nlohmann::json{{"num_cs", c.num_cs},
                     {"pattern_active", c.pattern_active},
                     {"num_distractors", c.num_distractors},
                     {"stimulus_duration", c.stimulus_duration},
                     {"isi", c.isi},
                     {"us_duration", c.us_duration},
                     {"iti_min", c.iti_min},
                     {"iti_max", c.iti_max},
                     {"pattern_rate", c.pattern_rate},
                     {"distractor_prob", c.distractor_prob},
                     {"distractors_per_step", c.distractors_per_step},
                     {"us_in_observation", c.us_in_observation},
                     {"us_value", c.us_value}};
}

inline void from_json(const nlohmann::json& j, AgentConfig& a) {
  detail::expect_keys(
      j, {"alpha0",           "theta",
          "lambda",           "adapt_step_sizes",
          "trace_features_only", "capacity_deep",
          "generate_deep",    "prune_deep",
          "capacity_imprint", "generate_imprint",
          "prune_imprint",    "utility_decay",
          "keep_fraction_deep", "keep_fraction_imprint",
          "psi_min",          "psi_max",
          "bias",             "deep_trace_enabled",
          "imprinting_enabled"},
      "agent.");
  detail::read(j, "alpha0", a.learner.alpha0, "agent.");
  detail::read(j, "theta", a.learner.theta, "agent.");
  detail::read(j, "lambda", a.learner.lambda, "agent.");
  detail::read(j, "adapt_step_sizes", a.learner.adapt_step_sizes, "agent.");
  detail::read(j, "trace_features_only", a.learner.trace_features_only, "agent.");
  detail::read(j, "capacity_deep", a.capacity_deep, "agent.");
  detail::read(j, "generate_deep", a.generate_deep, "agent.");
  detail::read(j, "prune_deep", a.prune_deep, "agent.");
  detail::read(j, "capacity_imprint", a.capacity_imprint, "agent.");
  detail::read(j, "generate_imprint", a.generate_imprint, "agent.");
  detail::read(j, "prune_imprint", a.prune_imprint, "agent.");
  detail::read(j, "utility_decay", a.utility_decay, "agent.");
  detail::read(j, "keep_fraction_deep", a.keep_fraction_deep, "agent.");
  detail::read(j, "keep_fraction_imprint", a.keep_fraction_imprint, "agent.");
  detail::read(j, "psi_min", a.psi_min, "agent.");
  detail::read(j, "psi_max", a.psi_max, "agent.");
  detail::read(j, "bias", a.bias, "agent.");
  detail::read(j, "deep_trace_enabled", a.deep_trace_enabled, "agent.");
  detail::read(j, "imprinting_enabled", a.imprinting_enabled, "agent.");
}

inline void to_json(nlohmann::json& j, const AgentConfig& a) {
  j = nlohmann::json{{"alpha0", a.learner.alpha0},
                     {"theta", a.learner.theta},
                     {"lambda", a.learner.lambda},
                     {"adapt_step_sizes", a.learner.adapt_step_sizes},
                     {"trace_features_only", a.learner.trace_features_only},
                     {"capacity_deep", a.capacity_deep},
                     {"generate_deep", a.generate_deep},
                     {"prune_deep", a.prune_deep},
                     {"capacity_imprint", a.capacity_imprint},
                     {"generate_imprint", a.generate_imprint},
                     {"prune_imprint", a.prune_imprint},
                     {"utility_decay", a.utility_decay},
                     {"keep_fraction_deep", a.keep_fraction_deep},
                     {"keep_fraction_imprint", a.keep_fraction_imprint},
                     {"psi_min", a.psi_min},
                     {"psi_max", a.psi_max},
                     {"bias", a.bias},
                     {"deep_trace_enabled", a.deep_trace_enabled},
                     {"imprinting_enabled", a.imprinting_enabled}};
}

// Named starting points for the standard experiments. Unlisted names throw.
//
//   tc-isi10 / tc-isi20 / tc-isi30: trace conditioning, deep traces only,
//       capacities 100/200/300, gamma = 1 - 1/ISI
//   tp: trace patterning, both generators, 200 deep + 60 imprinting
//   presence: observations-only baseline on the tc-isi10 stream
inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.agent.learner.alpha0 = 0.01;
  cfg.agent.learner.theta = 0.01;
  cfg.agent.learner.lambda = 0.9;
  cfg.agent.generate_deep = 2;
  cfg.agent.prune_deep = 2;
  cfg.agent.generate_imprint = 2;
  cfg.agent.prune_imprint = 2;

  if (name == "tc-isi10" || name == "tc-isi20" || name == "tc-isi30") {
    cfg.problem = Problem::TraceConditioning;
    const int isi = name == "tc-isi10" ? 10 : name == "tc-isi20" ? 20 : 30;
    cfg.tc.isi = isi;
    cfg.agent.capacity_deep = isi * 10;  // 100, 200, 300
    cfg.agent.capacity_imprint = 0;
    cfg.agent.deep_trace_enabled = true;
    cfg.agent.imprinting_enabled = false;
  } else if (name == "tp") {
    cfg.problem = Problem::TracePatterning;
    cfg.agent.capacity_deep = 200;
    cfg.agent.capacity_imprint = 60;
    cfg.agent.deep_trace_enabled = true;
    cfg.agent.imprinting_enabled = true;
  } else if (name == "presence") {
    cfg.problem = Problem::TraceConditioning;
    cfg.tc.isi = 10;
    cfg.agent.capacity_deep = 0;
    cfg.agent.capacity_imprint = 0;
    cfg.agent.deep_trace_enabled = false;
    cfg.agent.imprinting_enabled = false;
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  cfg.resolve();
  return cfg;
}

inline ExperimentConfig from_json_config(const nlohmann::json& j) {
  detail::expect_keys(j, {"preset", "problem", "env", "agent", "trials", "bin_size", "gamma"}, "");
  ExperimentConfig cfg;
  if (j.contains("preset")) cfg = preset(j.at("preset").get<std::string>());

  if (j.contains("problem")) {
    const std::string p = j.at("problem").get<std::string>();
    if (p == "trace-conditioning")
      cfg.problem = Problem::TraceConditioning;
    else if (p == "trace-patterning")
      cfg.problem = Problem::TracePatterning;
    else
      throw ConfigError("config field problem must be trace-conditioning or trace-patterning");
  }
  if (j.contains("env")) {
    if (cfg.problem == Problem::TraceConditioning)
      j.at("env").get_to(cfg.tc);
    else
      j.at("env").get_to(cfg.tp);
  }
  if (j.contains("agent")) j.at("agent").get_to(cfg.agent);
  detail::read(j, "trials", cfg.trials, "");
  detail::read(j, "bin_size", cfg.bin_size, "");
  detail::read(j, "gamma", cfg.gamma_override, "");
  cfg.resolve();
  return cfg;
}

// include_resolved_gamma controls whether the discount appears in the output:
// the resolved form (manifests, provenance) records it; the editable form
// (overrides) keeps it derived unless the user pinned it explicitly.
inline nlohmann::json to_json_config(const ExperimentConfig& cfg,
                                     bool include_resolved_gamma = true) {
  nlohmann::json env;
  if (cfg.problem == Problem::TraceConditioning)
    to_json(env, cfg.tc);
  else
    to_json(env, cfg.tp);
  nlohmann::json agent;
  to_json(agent, cfg.agent);
  nlohmann::json j{{"problem", to_string(cfg.problem)},
                   {"env", env},
                   {"agent", agent},
                   {"trials", cfg.trials},
                   {"bin_size", cfg.bin_size}};
  if (include_resolved_gamma)
    j["gamma"] = cfg.agent.learner.gamma;
  else if (cfg.gamma_override >= 0.0)
    j["gamma"] = cfg.gamma_override;
  return j;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return from_json_config(j);
}

// "section.key=value" override, applied on top of a parsed config.
inline void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  nlohmann::json j = to_json_config(cfg, /*include_resolved_gamma=*/false);
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::exception&) {
    parsed = value;  // bare strings allowed
  }

  const std::size_t dot = key.find('.');
  if (dot == std::string::npos) {
    j[key] = parsed;
  } else {
    j[key.substr(0, dot)][key.substr(dot + 1)] = parsed;
  }
  cfg = from_json_config(j);
}

}  // namespace gnt
