#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnt/errors.hpp"

namespace gnt {

struct LearnerConfig {
  double alpha0 = 0.01;  // initial step-size (the fixed step-size when adaptation is off)
  double theta = 0.01;   // meta step-size
  double gamma = 0.9;    // discount, in [0,1)
  double lambda = 0.9;   // eligibility decay, in [0,1]
  bool adapt_step_sizes = true;
  // When set, only the feature segment of f accumulates into the eligibility
  // trace; observation (and bias) weights then never carry credit backwards.
  bool trace_features_only = false;

  void validate() const {
    if (!(alpha0 > 0.0) || alpha0 > 1.0) throw ConfigError("alpha0 must be in (0,1]");
    if (theta < 0.0) throw ConfigError("theta must be non-negative");
    if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("gamma must be in [0,1)");
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda must be in [0,1]");
  }
};

// Online linear semi-gradient TD(lambda) with optional per-weight step-size
// adaptation (TD-IDBD style, exponential parameterization).
//
// One td_step completes the update for the transition between two successive
// prediction inputs:
//
//   delta = c + gamma * f_curr.w - f_prev.w
//   z     = gamma * lambda * z + f_prev
//   beta_i += theta * delta * z_i * h_i          (adaptation only)
//   alpha_i = exp(beta_i), scaled so that sum_i alpha_i f_prev_i z_i <= 1
//   w_i   += alpha_i * delta * z_i
//   h_i    = h_i * max(0, 1 - alpha_i f_prev_i z_i) + alpha_i delta z_i
//
// The caller passes the cumulant observed with f_curr, so delta returned at
// wall-clock step t is the error of the transition into step t. With
// adaptation off the update is plain TD(lambda) at fixed alpha0 (no guard),
// which is what the convergence oracles exercise.
class TdLearner {
 public:
  TdLearner(LearnerConfig cfg, int feature_count, int obs_count, bool bias_enabled)
      : cfg_(cfg),
        feature_count_(feature_count),
        size_(feature_count + obs_count + (bias_enabled ? 1 : 0)) {
    cfg_.validate();
    if (feature_count < 0 || obs_count < 0) throw ConfigError("learner segment sizes must be non-negative");
    w_.assign(static_cast<std::size_t>(size_), 0.0);
    z_.assign(static_cast<std::size_t>(size_), 0.0);
    log_step_.assign(static_cast<std::size_t>(size_), std::log(cfg_.alpha0));
    meta_trace_.assign(static_cast<std::size_t>(size_), 0.0);
  }

  int size() const { return size_; }
  int feature_count() const { return feature_count_; }
  const LearnerConfig& config() const { return cfg_; }
  std::uint64_t steps_done() const { return steps_; }

  const std::vector<double>& weights() const { return w_; }
  const std::vector<double>& eligibility() const { return z_; }
  double weight(int i) const { return w_[static_cast<std::size_t>(i)]; }
  double step_size(int i) const {
    return cfg_.adapt_step_sizes ? std::exp(log_step_[static_cast<std::size_t>(i)]) : cfg_.alpha0;
  }

  double predict(std::span<const double> f) const {
    if (static_cast<int>(f.size()) != size_)
      throw ConfigError("prediction input length " + std::to_string(f.size()) +
                        " does not match learner size " + std::to_string(size_));
    double y = 0.0;
    for (int i = 0; i < size_; ++i) y += w_[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i)];
    return y;
  }

  double td_step(std::span<const double> f_prev, std::span<const double> f_curr, double cumulant) {
    if (static_cast<int>(f_prev.size()) != size_ || static_cast<int>(f_curr.size()) != size_)
      throw ConfigError("td_step input lengths do not match learner size");

    const double delta = cumulant + cfg_.gamma * predict(f_curr) - predict(f_prev);

    const double decay = cfg_.gamma * cfg_.lambda;
    const int traced = cfg_.trace_features_only ? feature_count_ : size_;
    for (int i = 0; i < size_; ++i) {
      z_[static_cast<std::size_t>(i)] *= decay;
      if (i < traced) z_[static_cast<std::size_t>(i)] += f_prev[static_cast<std::size_t>(i)];
    }

    if (cfg_.adapt_step_sizes) {
      for (int i = 0; i < size_; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        log_step_[k] += cfg_.theta * delta * z_[k] * meta_trace_[k];
        log_step_[k] = std::clamp(log_step_[k], kLogStepMin, kLogStepMax);
      }
      // Guard: cap the total effective step on the visited input at 1.
      double effective = 0.0;
      for (int i = 0; i < size_; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        effective += std::exp(log_step_[k]) * f_prev[k] * z_[k];
      }
      const double scale = effective > 1.0 ? 1.0 / effective : 1.0;
      for (int i = 0; i < size_; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double alpha = scale * std::exp(log_step_[k]);
        w_[k] += alpha * delta * z_[k];
        meta_trace_[k] = meta_trace_[k] * std::max(0.0, 1.0 - alpha * f_prev[k] * z_[k]) +
                         alpha * delta * z_[k];
      }
    } else {
      for (int i = 0; i < size_; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        w_[k] += cfg_.alpha0 * delta * z_[k];
      }
    }

    ++steps_;
    if (!std::isfinite(delta)) throw DivergenceError(steps_, "TD error is not finite");
    for (int i = 0; i < size_; ++i) {
      if (!std::isfinite(w_[static_cast<std::size_t>(i)]))
        throw DivergenceError(steps_, "weight " + std::to_string(i) + " is not finite");
    }
    return delta;
  }

  // Clears the learner state of one feature slot: weight, trace, step-size,
  // and meta trace return to their creation values. Observation and bias
  // weights are never reset.
  void reset_weight(int index) {
    if (index < 0 || index >= feature_count_)
      throw ContractViolation("reset_weight: index " + std::to_string(index) +
                              " is outside the feature segment");
    const std::size_t k = static_cast<std::size_t>(index);
    w_[k] = 0.0;
    z_[k] = 0.0;
    log_step_[k] = std::log(cfg_.alpha0);
    meta_trace_[k] = 0.0;
  }

 private:
  static constexpr double kLogStepMin = -23.025850929940457;  // ln(1e-10)
  static constexpr double kLogStepMax = 4.605170185988092;    // ln(1e2)

  LearnerConfig cfg_;
  int feature_count_;
  int size_;
  std::vector<double> w_;
  std::vector<double> z_;
  std::vector<double> log_step_;    // beta: per-weight log step-size
  std::vector<double> meta_trace_;  // h: per-weight meta trace
  std::uint64_t steps_ = 0;
};

}  // namespace gnt
