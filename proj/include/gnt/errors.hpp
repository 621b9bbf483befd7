#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gnt {

// Invalid configuration or dimension mismatch between configured components.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Misuse of a documented contract (e.g. resetting an observation weight).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Learner produced a non-finite TD error or weight. Carries the learner step
// index at which the update blew up; callers add run/seed context.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::uint64_t step, const std::string& what)
      : std::runtime_error("divergence at step " + std::to_string(step) + ": " + what),
        step_(step) {}

  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t step_;
};

}  // namespace gnt
