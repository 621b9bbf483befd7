#pragma once

#include <vector>

#include "gnt/errors.hpp"

namespace gnt {

// One step of environment output: binary stimulus signals plus the scalar
// cumulant (the US value that the learner predicts the discounted sum of).
// Signal count is fixed for the lifetime of a run.
struct Observation {
  std::vector<double> signals;  // each exactly 0 or 1
  double cumulant = 0.0;

  bool any_active() const {
    for (double s : signals)
      if (s != 0.0) return true;
    return false;
  }

  void validate() const {
    for (std::size_t i = 0; i < signals.size(); ++i) {
      if (signals[i] != 0.0 && signals[i] != 1.0)
        throw ContractViolation("observation signal " + std::to_string(i) + " is not binary");
    }
    if (cumulant < 0.0) throw ContractViolation("cumulant must be non-negative");
  }
};

}  // namespace gnt
