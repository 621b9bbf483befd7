#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gnt/rng.hpp"
#include "gnt/state_network.hpp"

using gnt::FeatureKind;
using gnt::ImprintMap;
using gnt::Observation;
using gnt::StateNetwork;

namespace {

Observation obs(std::vector<double> signals, double cumulant = 0.0) {
  return Observation{std::move(signals), cumulant};
}

void advance(StateNetwork& net, const Observation& o, std::vector<double>& x) {
  net.build_input(o, x);
  net.compute_state(x, o);
}

}  // namespace

TEST_CASE("input vector is [previous state, observation]") {
  std::vector<double> x;

  SECTION("one feature") {
    StateNetwork net(1, 0, 2, false);
    net.add_deep_trace(net.obs_offset() + 0, 0.5);  // traces obs 0
    advance(net, obs({1, 0}), x);                   // activation -> 0.5
    net.build_input(obs({1, 0}), x);
    REQUIRE(x == std::vector<double>{0.5, 1, 0});
  }

  SECTION("no features yet") {
    StateNetwork net(0, 0, 2, false);
    net.build_input(obs({0, 0}), x);
    REQUIRE(x == std::vector<double>{0, 0});
  }

  SECTION("two features") {
    StateNetwork net(2, 0, 1, false);
    net.add_deep_trace(net.obs_offset(), 0.9);
    net.add_deep_trace(net.obs_offset(), 0.91);
    advance(net, obs({1}), x);  // 0.1 and 0.09
    net.build_input(obs({1}), x);
    REQUIRE(x.size() == 3);
    CHECK(x[0] == Catch::Approx(0.1).margin(1e-15));
    CHECK(x[1] == Catch::Approx(0.09).margin(1e-15));
    CHECK(x[2] == 1.0);
  }
}

TEST_CASE("deep trace follows psi * s + (1 - psi) * source") {
  StateNetwork net(1, 0, 1, false);
  net.add_deep_trace(net.obs_offset(), 0.9);
  std::vector<double> x;

  advance(net, obs({1}), x);
  CHECK(net.activation(0) == Catch::Approx(0.1).margin(1e-15));

  advance(net, obs({0}), x);
  CHECK(net.activation(0) == Catch::Approx(0.09).margin(1e-15));
}

TEST_CASE("imprinting LTU thresholds on its connection sum") {
  StateNetwork net(0, 1, 2, false);
  const Observation creating = obs({1, 0});
  const int slot = net.add_imprint(ImprintMap{{0, +1}, {1, -1}}, creating);
  REQUIRE(slot == 0);
  CHECK(net.activation(slot) == 1.0);  // active at creation by construction

  std::vector<double> x;
  advance(net, obs({0, 1}), x);
  CHECK(net.activation(slot) == 0.0);  // sum -1 < threshold 0

  advance(net, obs({1, 0}), x);
  CHECK(net.activation(slot) == 1.0);

  // balanced +1/-1 connections fire on the all-zero observation (0 >= 0)
  advance(net, obs({0, 0}), x);
  CHECK(net.activation(slot) == 1.0);

  advance(net, obs({1, 1}), x);
  CHECK(net.activation(slot) == 1.0);  // 0 >= 0 as well
}

TEST_CASE("imprinting activation ignores unconnected signals") {
  StateNetwork net(0, 1, 5, false);
  const Observation creating = obs({1, 0, 0, 1, 0});
  net.add_imprint(ImprintMap{{0, +1}, {3, +1}}, creating);

  gnt::Rng rng(5);
  std::vector<double> x;
  for (int trial = 0; trial < 200; ++trial) {
    const double a = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double b = rng.bernoulli(0.5) ? 1.0 : 0.0;
    Observation o1 = obs({a, 0, 0, b, 0});
    Observation o2 = obs({a, 1, rng.bernoulli(0.5) ? 1.0 : 0.0, b, 1});
    advance(net, o1, x);
    const double act1 = net.activation(0);
    advance(net, o2, x);
    const double act2 = net.activation(0);
    REQUIRE(act1 == act2);
  }
}

TEST_CASE("impulse response matches the closed form (1-psi) psi^k") {
  gnt::Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const double psi = rng.uniform(0.01, 0.99);
    const int k = static_cast<int>(rng.uniform_int(0, 200));
    StateNetwork net(1, 0, 1, false);
    net.add_deep_trace(net.obs_offset(), psi);
    std::vector<double> x;
    advance(net, obs({1}), x);  // impulse step: k = 0
    for (int i = 0; i < k; ++i) advance(net, obs({0}), x);
    const double expected = (1.0 - psi) * std::pow(psi, k);
    REQUIRE(std::abs(net.activation(0) - expected) <= 1e-12);
  }
}

TEST_CASE("a chain of deep traces stays in [0,1] for inputs in [0,1]") {
  gnt::Rng rng(123);
  StateNetwork net(8, 0, 1, false);
  int prev = net.obs_offset();
  for (int i = 0; i < 8; ++i) {
    const double psi = rng.uniform(0.01, 0.99);
    prev = net.add_deep_trace(prev, psi);  // each traces the one before
    REQUIRE(prev == i);
  }
  std::vector<double> x;
  for (int t = 0; t < 5000; ++t) {
    advance(net, obs({rng.bernoulli(0.3) ? 1.0 : 0.0}), x);
    for (int i = 0; i < 8; ++i) {
      REQUIRE(net.activation(i) >= 0.0);
      REQUIRE(net.activation(i) <= 1.0);
    }
  }
}

TEST_CASE("compute_state is deterministic bit for bit") {
  auto run = [](std::uint64_t seed) {
    gnt::Rng rng(seed);
    StateNetwork net(4, 2, 3, true);
    net.add_deep_trace(net.obs_offset() + 1, 0.73);
    net.add_deep_trace(0, 0.42);
    net.add_imprint(ImprintMap{{0, +1}, {2, -1}}, Observation{{1, 0, 0}, 0});
    std::vector<double> x;
    std::vector<double> history;
    for (int t = 0; t < 500; ++t) {
      Observation o{{rng.bernoulli(0.4) ? 1.0 : 0.0, rng.bernoulli(0.2) ? 1.0 : 0.0,
                     rng.bernoulli(0.1) ? 1.0 : 0.0},
                    0.0};
      net.build_input(o, x);
      net.compute_state(x, o);
      for (int i = 0; i < net.feature_slots(); ++i) history.push_back(net.activation(i));
    }
    return history;
  };
  REQUIRE(run(7) == run(7));
}

TEST_CASE("bias appears only in the prediction input") {
  StateNetwork net(1, 0, 2, true);
  REQUIRE(net.input_size() == 3);
  REQUIRE(net.prediction_size() == 4);
  std::vector<double> f;
  net.build_prediction_input(obs({1, 0}), f);
  REQUIRE(f == std::vector<double>{0, 1, 0, 1});
}

TEST_CASE("network rejects bad dimensions and dangling sources") {
  StateNetwork net(2, 1, 2, false);
  std::vector<double> x{0, 0};
  CHECK_THROWS_AS(net.build_input(obs({1}), x), gnt::ConfigError);
  CHECK_THROWS_AS(net.compute_state(std::vector<double>{1.0}, obs({0, 0})), gnt::ConfigError);
  CHECK_THROWS_AS(net.add_deep_trace(99, 0.5), gnt::ContractViolation);
  CHECK_THROWS_AS(net.add_deep_trace(1, 0.5), gnt::ContractViolation);  // slot 1 not live
  CHECK_THROWS_AS(net.add_deep_trace(net.obs_offset(), 1.0), gnt::ContractViolation);
}

TEST_CASE("capacity, duplicate rejection, and refcount protection") {
  StateNetwork net(2, 2, 2, false);
  const Observation o = obs({1, 1});

  REQUIRE(net.add_deep_trace(net.obs_offset(), 0.5) == 0);
  REQUIRE(net.add_deep_trace(0, 0.6) == 1);  // traces feature 0
  REQUIRE(net.add_deep_trace(net.obs_offset(), 0.7) == -1);  // at capacity
  REQUIRE(net.live_deep() == 2);
  REQUIRE(net.source_refcount(0) == 1);

  CHECK_THROWS_AS(net.remove(0), gnt::ContractViolation);  // protected source
  net.remove(1);
  REQUIRE(net.source_refcount(0) == 0);
  net.remove(0);
  REQUIRE(net.live_deep() == 0);

  const int a = net.add_imprint(ImprintMap{{0, +1}}, o);
  REQUIRE(a >= 0);
  REQUIRE(net.add_imprint(ImprintMap{{0, +1}}, o) == -1);  // duplicate map
  REQUIRE(net.add_imprint(ImprintMap{{0, -1}}, obs({0, 0})) >= 0);  // differs in sign
  REQUIRE(net.live_imprint() == 2);
  REQUIRE(net.add_imprint(ImprintMap{{1, +1}}, o) == -1);  // at capacity
}

TEST_CASE("slots are recycled in place") {
  StateNetwork net(2, 0, 1, false);
  REQUIRE(net.add_deep_trace(net.obs_offset(), 0.5) == 0);
  REQUIRE(net.add_deep_trace(net.obs_offset(), 0.6) == 1);
  net.remove(0);
  REQUIRE_FALSE(net.slot_live(0));
  REQUIRE(net.activation(0) == 0.0);
  REQUIRE(net.add_deep_trace(net.obs_offset(), 0.7) == 0);  // same slot reused
  REQUIRE(net.node(0).decay == 0.7);
  REQUIRE(net.node(0).birth > net.node(1).birth);  // recycled slot is younger
}
