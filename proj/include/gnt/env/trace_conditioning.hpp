#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gnt/errors.hpp"
#include "gnt/observation.hpp"
#include "gnt/rng.hpp"

namespace gnt {

// Marks the step on which a trial begins; consumers align evaluation windows
// against the emitted stream with these.
struct TrialInfo {
  std::uint64_t trial_index = 0;
  std::uint64_t cs_onset_step = 0;
  std::optional<std::uint64_t> us_onset_step;
  bool pattern_present = true;
};

struct TraceConditioningConfig {
  int isi = 10;          // CS onset to US onset, in steps
  int cs_duration = 4;
  int us_duration = 2;
  int iti_min = 80;      // US onset to next CS onset, uniform inclusive
  int iti_max = 120;
  int num_distractors = 10;  // rates 1/10, 1/20, ..., 1/(10*k)
  int distractor_duration = 4;
  bool us_in_observation = true;
  double us_value = 1.0;

  int num_signals() const { return 1 + num_distractors + (us_in_observation ? 1 : 0); }
  int us_index() const { return us_in_observation ? 1 + num_distractors : -1; }
  double default_gamma() const { return 1.0 - 1.0 / static_cast<double>(isi); }

  void validate() const {
    if (isi < cs_duration) throw ConfigError("tc.isi must be >= cs_duration");
    if (cs_duration <= 0 || us_duration <= 0) throw ConfigError("tc stimulus durations must be positive");
    if (iti_min > iti_max) throw ConfigError("tc.iti_min must be <= iti_max");
    if (iti_min <= isi + us_duration) throw ConfigError("tc.iti_min must exceed isi + us_duration");
    if (num_distractors < 0) throw ConfigError("tc.num_distractors must be non-negative");
    if (distractor_duration <= 0) throw ConfigError("tc.distractor_duration must be positive");
    if (us_value <= 0.0) throw ConfigError("tc.us_value must be positive");
  }
};

// Trace conditioning stream: each trial is a CS pulse followed by the US one
// ISI after CS onset; the cumulant equals the US value. Distractor signals
// carry no information about the trial: each is an independent per-step
// Bernoulli onset process (rate 1/(10k) for the k-th), held active for its
// duration and re-armed after offset.
//
// Signal layout: [CS, distractor 1..D, US?]. Deterministic given (config, seed).
class TraceConditioningEnv {
 public:
  TraceConditioningEnv(TraceConditioningConfig cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(seed), distractor_off_at_(static_cast<std::size_t>(cfg.num_distractors), 0) {
    cfg_.validate();
    obs_.signals.assign(static_cast<std::size_t>(cfg_.num_signals()), 0.0);
    next_cs_onset_ = draw_iti();
  }

  const TraceConditioningConfig& config() const { return cfg_; }
  std::uint64_t current_step() const { return step_; }
  std::uint64_t trials_started() const { return trials_started_; }

  // Emits the observation for the current step and advances. When this step
  // begins a trial, last_annotation() carries the trial window.
  const Observation& step() {
    annotation_.reset();
    if (step_ == next_cs_onset_) {
      cs_onset_ = step_;
      us_onset_ = step_ + static_cast<std::uint64_t>(cfg_.isi);
      annotation_ = TrialInfo{trials_started_, cs_onset_, us_onset_, true};
      next_cs_onset_ = us_onset_ + draw_iti();
      ++trials_started_;
    }

    const bool cs_on = trials_started_ > 0 && step_ >= cs_onset_ &&
                       step_ < cs_onset_ + static_cast<std::uint64_t>(cfg_.cs_duration);
    const bool us_on = trials_started_ > 0 && step_ >= us_onset_ &&
                       step_ < us_onset_ + static_cast<std::uint64_t>(cfg_.us_duration);

    obs_.signals[0] = cs_on ? 1.0 : 0.0;
    for (int k = 0; k < cfg_.num_distractors; ++k) {
      const std::size_t idx = static_cast<std::size_t>(k);
      if (step_ >= distractor_off_at_[idx]) {
        const double rate = 1.0 / (10.0 * static_cast<double>(k + 1));
        if (rng_.bernoulli(rate))
          distractor_off_at_[idx] = step_ + static_cast<std::uint64_t>(cfg_.distractor_duration);
      }
      obs_.signals[static_cast<std::size_t>(1 + k)] = step_ < distractor_off_at_[idx] ? 1.0 : 0.0;
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

  TraceConditioningConfig cfg_;
  Rng rng_;
  Observation obs_;
  std::optional<TrialInfo> annotation_;

  std::uint64_t step_ = 0;
  std::uint64_t trials_started_ = 0;
  std::uint64_t next_cs_onset_ = 0;
  std::uint64_t cs_onset_ = 0;
  std::uint64_t us_onset_ = 0;
  std::vector<std::uint64_t> distractor_off_at_;
};

}  // namespace gnt
