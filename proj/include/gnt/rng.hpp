#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gnt {

// SplitMix64 mixer, used to derive independent stream seeds from a master
// seed. Streams derived with distinct indices are statistically independent
// for our purposes (per-run, per-environment, per-agent).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// Seeded random stream. Wraps mt19937_64 with fixed sampling algorithms so
// that a (seed, call sequence) pair reproduces bit-identical draws regardless
// of the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer on [lo, hi], inclusive. Rejection sampling, unbiased.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t range = hi - lo + 1;  // hi >= lo; range 0 means full span
    if (range == 0) return engine_();
    const std::uint64_t threshold = (0 - range) % range;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return lo + (r % range);
    }
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller without caching: two uniforms per draw, stateless.
  double normal(double mean, double stddev) {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gnt
