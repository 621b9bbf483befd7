#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gnt/errors.hpp"

namespace gnt {

// Discounted returns G_t = sum_k gamma^k c_{t+k+1} computed offline over a
// logged run. The tail beyond the log is treated as zero; the final
// truncation_window steps can be off by up to epsilon * max|c| / (1 - gamma)
// and are excluded from binning.
struct ReturnSeries {
  std::vector<double> values;
  std::size_t valid_length = 0;  // steps before the tail-truncation cutoff
  double truncation_epsilon = 1e-6;
};

inline ReturnSeries compute_returns(std::span<const double> cumulants, double gamma,
                                    double epsilon = 1e-6) {
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("returns require gamma in [0,1)");
  if (!(epsilon > 0.0) || epsilon >= 1.0) throw ConfigError("truncation epsilon must be in (0,1)");
  ReturnSeries series;
  series.truncation_epsilon = epsilon;
  const std::size_t n = cumulants.size();
  series.values.assign(n, 0.0);
  if (n == 0) return series;

  // backward recursion G_t = c_{t+1} + gamma * G_{t+1}
  series.values[n - 1] = 0.0;
  for (std::size_t t = n - 1; t-- > 0;)
    series.values[t] = cumulants[t + 1] + gamma * series.values[t + 1];

  std::size_t horizon = 1;
  if (gamma > 0.0)
    horizon = static_cast<std::size_t>(std::ceil(std::log(epsilon) / std::log(gamma)));
  if (horizon < 1) horizon = 1;
  series.valid_length = n > horizon ? n - horizon : 0;
  return series;
}

// Mean squared return error per fixed-width step bin. Only steps before the
// return series' truncation cutoff are binned; the final bin may be partial.
struct BinnedError {
  std::size_t bin_size = 1000;
  std::vector<double> msre;
  std::vector<std::size_t> counts;
};

inline BinnedError bin_msre(std::span<const double> predictions, const ReturnSeries& returns,
                            std::size_t bin_size = 1000) {
  if (bin_size == 0) throw ConfigError("bin_size must be positive");
  if (predictions.size() != returns.values.size())
    throw ContractViolation("bin_msre: prediction and return lengths differ");
  BinnedError binned;
  binned.bin_size = bin_size;
  const std::size_t n = returns.valid_length;
  const std::size_t bins = (n + bin_size - 1) / bin_size;
  binned.msre.assign(bins, 0.0);
  binned.counts.assign(bins, 0);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t b = t / bin_size;
    const double err = predictions[t] - returns.values[t];
    binned.msre[b] += err * err;
    ++binned.counts[b];
  }
  for (std::size_t b = 0; b < bins; ++b)
    if (binned.counts[b] > 0) binned.msre[b] /= static_cast<double>(binned.counts[b]);
  return binned;
}

// Cross-run mean and standard error per bin, truncated to the shortest run.
struct AggregateBins {
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::size_t n_runs = 0;
  bool single_run = false;  // stderr reported as 0 by convention
};

inline AggregateBins aggregate_runs(const std::vector<BinnedError>& runs) {
  if (runs.empty()) throw ContractViolation("aggregate_runs: no runs");
  AggregateBins agg;
  agg.n_runs = runs.size();
  agg.single_run = runs.size() == 1;

  std::size_t bins = runs.front().msre.size();
  for (const BinnedError& r : runs) bins = std::min(bins, r.msre.size());
  agg.mean.assign(bins, 0.0);
  agg.stderr_.assign(bins, 0.0);

  for (std::size_t b = 0; b < bins; ++b) {
    double sum = 0.0;
    for (const BinnedError& r : runs) sum += r.msre[b];
    const double mean = sum / static_cast<double>(runs.size());
    agg.mean[b] = mean;
    if (runs.size() > 1) {
      double ss = 0.0;
      for (const BinnedError& r : runs) {
        const double d = r.msre[b] - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(runs.size() - 1));
      agg.stderr_[b] = sd / std::sqrt(static_cast<double>(runs.size()));
    }
  }
  return agg;
}

}  // namespace gnt
