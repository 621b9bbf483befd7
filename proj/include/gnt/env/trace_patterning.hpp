#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gnt/env/trace_conditioning.hpp"
#include "gnt/errors.hpp"
#include "gnt/observation.hpp"
#include "gnt/rng.hpp"

namespace gnt {

struct TracePatterningConfig {
  int num_cs = 6;
  int pattern_active = 3;  // CSs active in the rewarded pattern; the rest must be inactive
  int num_distractors = 10;
  int stimulus_duration = 4;
  int isi = 10;
  int us_duration = 2;
  int iti_min = 80;
  int iti_max = 120;
  double pattern_rate = 0.5;      // fraction of trials showing the pattern
  double distractor_prob = 0.5;   // per-trial activation probability
  bool distractors_per_step = false;  // alternative reading: per-step Bernoulli instead of co-onset
  bool us_in_observation = true;
  double us_value = 1.0;

  int num_signals() const { return num_cs + num_distractors + (us_in_observation ? 1 : 0); }
  int us_index() const { return us_in_observation ? num_cs + num_distractors : -1; }
  double default_gamma() const { return 0.9; }

  void validate() const {
    if (num_cs <= 0) throw ConfigError("tp.num_cs must be positive");
    if (pattern_active <= 0 || pattern_active >= num_cs)
      throw ConfigError("tp.pattern_active must leave at least one inactive CS");
    if (num_distractors < 0) throw ConfigError("tp.num_distractors must be non-negative");
    if (stimulus_duration <= 0 || us_duration <= 0) throw ConfigError("tp stimulus durations must be positive");
    if (isi < stimulus_duration) throw ConfigError("tp.isi must be >= stimulus_duration");
    if (iti_min > iti_max) throw ConfigError("tp.iti_min must be <= iti_max");
    if (iti_min <= isi + us_duration) throw ConfigError("tp.iti_min must exceed isi + us_duration");
    if (pattern_rate < 0.0 || pattern_rate > 1.0) throw ConfigError("tp.pattern_rate must be in [0,1]");
    if (distractor_prob < 0.0 || distractor_prob > 1.0) throw ConfigError("tp.distractor_prob must be in [0,1]");
    if (us_value <= 0.0) throw ConfigError("tp.us_value must be positive");
  }
};

// Trace patterning stream: several CSs, of which one fixed configuration of
// active and inactive signals (the activation pattern, drawn once per run)
// is followed by the US one ISI after onset. Other trials show a uniformly
// random non-pattern configuration and no US. Distractors co-onset with the
// CSs, each active with probability 1/2 per trial.
//
// Signal layout: [CS 1..C, distractor 1..D, US?].
class TracePatterningEnv {
 public:
  TracePatterningEnv(TracePatterningConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {
    cfg_.validate();
    obs_.signals.assign(static_cast<std::size_t>(cfg_.num_signals()), 0.0);
    pattern_ = draw_pattern();
    cs_config_.assign(static_cast<std::size_t>(cfg_.num_cs), false);
    distractor_on_.assign(static_cast<std::size_t>(cfg_.num_distractors), false);
    next_cs_onset_ = draw_iti();
  }

  const TracePatterningConfig& config() const { return cfg_; }
  const std::vector<bool>& pattern() const { return pattern_; }
  std::uint64_t current_step() const { return step_; }
  std::uint64_t trials_started() const { return trials_started_; }

  const Observation& step() {
    annotation_.reset();
    if (step_ == next_cs_onset_) {
      cs_onset_ = step_;
      pattern_trial_ = rng_.bernoulli(cfg_.pattern_rate);
      if (pattern_trial_) {
        cs_config_.assign(pattern_.begin(), pattern_.end());
      } else {
        draw_non_pattern(cs_config_);
      }
      for (int k = 0; k < cfg_.num_distractors; ++k)
        distractor_on_[static_cast<std::size_t>(k)] = rng_.bernoulli(cfg_.distractor_prob);
      us_onset_ = step_ + static_cast<std::uint64_t>(cfg_.isi);
      annotation_ = TrialInfo{trials_started_, cs_onset_,
                              pattern_trial_ ? std::optional<std::uint64_t>(us_onset_) : std::nullopt,
                              pattern_trial_};
      next_cs_onset_ = us_onset_ + draw_iti();
      ++trials_started_;
    }

    const bool stimulus_window = trials_started_ > 0 && step_ >= cs_onset_ &&
                                 step_ < cs_onset_ + static_cast<std::uint64_t>(cfg_.stimulus_duration);
    const bool us_on = trials_started_ > 0 && pattern_trial_ && step_ >= us_onset_ &&
                       step_ < us_onset_ + static_cast<std::uint64_t>(cfg_.us_duration);

    for (int c = 0; c < cfg_.num_cs; ++c) {
      obs_.signals[static_cast<std::size_t>(c)] =
          stimulus_window && cs_config_[static_cast<std::size_t>(c)] ? 1.0 : 0.0;
    }
    for (int k = 0; k < cfg_.num_distractors; ++k) {
      bool on;
      if (cfg_.distractors_per_step) {
        on = stimulus_window && rng_.bernoulli(cfg_.distractor_prob);
      } else {
        on = stimulus_window && distractor_on_[static_cast<std::size_t>(k)];
      }
      obs_.signals[static_cast<std::size_t>(cfg_.num_cs + k)] = on ? 1.0 : 0.0;
    }
    if (cfg_.us_in_observation)
      obs_.signals[static_cast<std::size_t>(cfg_.us_index())] = us_on ? 1.0 : 0.0;
    obs_.cumulant = us_on ? cfg_.us_value : 0.0;

    ++step_;
    return obs_;
  }

  const std::optional<TrialInfo>& last_annotation() const { return annotation_; }

 private:
  std::uint64_t draw_iti() {
    return rng_.uniform_int(static_cast<std::uint64_t>(cfg_.iti_min),
                            static_cast<std::uint64_t>(cfg_.iti_max));
  }

  std::vector<bool> draw_pattern() {
    // choose pattern_active distinct CS indices (partial Fisher-Yates)
    std::vector<int> indices(static_cast<std::size_t>(cfg_.num_cs));
    for (int i = 0; i < cfg_.num_cs; ++i) indices[static_cast<std::size_t>(i)] = i;
    std::vector<bool> pattern(static_cast<std::size_t>(cfg_.num_cs), false);
    for (int k = 0; k < cfg_.pattern_active; ++k) {
      const std::uint64_t j =
          rng_.uniform_int(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(cfg_.num_cs) - 1);
      std::swap(indices[static_cast<std::size_t>(k)], indices[static_cast<std::size_t>(j)]);
      pattern[static_cast<std::size_t>(indices[static_cast<std::size_t>(k)])] = true;
    }
    return pattern;
  }

  // Uniform over all CS configurations except the pattern (the all-zero
  // configuration included).
  void draw_non_pattern(std::vector<bool>& config) {
    for (;;) {
      bool equals_pattern = true;
      for (int c = 0; c < cfg_.num_cs; ++c) {
        const bool bit = rng_.bernoulli(0.5);
        config[static_cast<std::size_t>(c)] = bit;
        if (bit != pattern_[static_cast<std::size_t>(c)]) equals_pattern = false;
      }
      if (!equals_pattern) return;
    }
  }

  TracePatterningConfig cfg_;
  Rng rng_;
  Observation obs_;
  std::optional<TrialInfo> annotation_;

  std::vector<bool> pattern_;
  std::vector<bool> cs_config_;
  std::vector<bool> distractor_on_;
  bool pattern_trial_ = false;

  std::uint64_t step_ = 0;
  std::uint64_t trials_started_ = 0;
  std::uint64_t next_cs_onset_ = 0;
  std::uint64_t cs_onset_ = 0;
  std::uint64_t us_onset_ = 0;
};

}  // namespace gnt
