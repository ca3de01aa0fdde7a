#include <doctest.h>

#include <cmath>
#include <random>

#include "ranslice/environment.hpp"
#include "ranslice/errors.hpp"
#include "ranslice/learner.hpp"
#include "support/fixtures.hpp"

using namespace ranslice;

namespace {

Trace uniform_trace(std::size_t windows, double density, const FlowModel& flow = {}) {
  Trace t;
  for (std::size_t w = 0; w < windows; ++w) t.push_back(make_window(w, Eigen::VectorXd::Constant(25, density), flow));
  return t;
}

EnvConfig default_config() {
  EnvConfig c;
  c.services = testing::default_services();
  return c;
}

Eigen::VectorXd constant_fractions(std::size_t num_bs, double u, double e) {
  Eigen::VectorXd f(action_size(num_bs));
  for (Eigen::Index g = 0; g < f.size(); g += kGroupSize) f.segment(g, kGroupSize) << u, e, 1.0 - u - e;
  return f;
}

StepRequest uniform_request(const Environment& env, int su, int se, int cu, int ce) {
  const auto N = static_cast<Eigen::Index>(env.topology().num_bs());
  StepRequest r;
  r.allocation.spectrum.resize(N, kNumServices);
  r.allocation.compute.resize(N, kNumServices);
  r.allocation.spectrum.col(kDelaySensitive).setConstant(su);
  r.allocation.spectrum.col(kDelayTolerant).setConstant(se);
  r.allocation.compute.col(kDelaySensitive).setConstant(cu);
  r.allocation.compute.col(kDelayTolerant).setConstant(ce);
  return r;
}

// One BS over two non-overlapped 0.5 km zones. With the rate pinned to the
// task size, kappa_s for the delay-sensitive service is 1 and its spectrum
// bound equals rho (lambda_u = 1, 2 zones of 0.5 km).
LoadProfile single_bs_profile(double density) {
  const auto topo = build_topology(1.0, 0.5, {0.5}, 0.8);
  RadioConfig radio;
  radio.rate_override_bps = {0.6e6};
  const auto services = testing::default_services(1.0, 0.01);
  const auto rates = compute_rates(radio, topo);
  return build_load_profile(topo, make_window(0, Eigen::Vector2d(density, density), FlowModel{}), services, radio,
                            rates);
}

Allocation single_bs_allocation(int su, int se, int cu, int ce) {
  Allocation a;
  a.spectrum.resize(1, kNumServices);
  a.compute.resize(1, kNumServices);
  a.spectrum << su, se;
  a.compute << cu, ce;
  return a;
}

}  // namespace

TEST_CASE("reward branches") {
  const CostWeights w;
  CHECK(window_reward(123.0, false, false, w) == -400.0);
  CHECK(window_reward(40.0, true, true, w) == -40.0);
  CHECK(window_reward(40.0, true, false, w) == -240.0);
  CHECK(window_reward(40.0, false, true, w) == -200.0);
}

TEST_CASE("decode examples") {
  Eigen::VectorXd f = constant_fractions(1, 1.0 / 3.0, 1.0 / 3.0);
  auto a = decode_action(f, 1, 18, 18);
  CHECK(a.spectrum(0, 0) == 6);
  CHECK(a.spectrum(0, 1) == 6);
  CHECK(a.compute.sum() == 12);

  a = decode_action(constant_fractions(1, 0.5, 0.25), 1, 18, 18);
  CHECK(a.spectrum(0, 0) == 9);
  CHECK(a.spectrum(0, 1) == 4);

  a = decode_action(constant_fractions(1, 0.01, 0.01), 1, 18, 18);
  CHECK(a.spectrum(0, 0) == 1);
  CHECK(a.spectrum(0, 1) == 1);

  CHECK_THROWS_AS(decode_action(f, 1, 1, 18), Error);
  CHECK_THROWS_AS(decode_action(f, 2, 18, 18), Error);
}

TEST_CASE("decoded allocations respect capacity and integrality") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd f = i % 2 ? random_fractions(5, rng) : Eigen::VectorXd(action_size(5));
    if (i % 2 == 0) {
      // skewed corners as well as the interior
      for (Eigen::Index g = 0; g < f.size(); g += kGroupSize) {
        const double a = std::pow(unit(rng), 4.0), b = std::pow(unit(rng), 0.25);
        const double u = std::min(a, b), e = std::max(a, b) - u;
        f.segment(g, kGroupSize) << u, e, 1.0 - u - e;
      }
    }
    const auto a = decode_action(f, 5, 18, 18);
    REQUIRE(a.spectrum.minCoeff() >= 1);
    REQUIRE(a.compute.minCoeff() >= 1);
    REQUIRE(a.spectrum.rowwise().sum().maxCoeff() <= 18);
    REQUIRE(a.compute.rowwise().sum().maxCoeff() <= 18);
  }
  // the clamp can push a tight row over capacity; the repair brings it back
  const auto a = decode_action(constant_fractions(1, 0.999, 0.0005), 1, 2, 2);
  CHECK(a.spectrum(0, 0) == 1);
  CHECK(a.spectrum(0, 1) == 1);
}

TEST_CASE("shaping raises a violated allocation to the next integer") {
  const auto profile = single_bs_profile(4.2);
  const Eigen::MatrixXd split(0, kNumServices);
  CHECK(profile.kappa_s(0, kDelaySensitive) * profile.chi(0, kDelaySensitive) == doctest::Approx(4.2));
  const auto shaped = shape_decision(single_bs_allocation(3, 1, 1, 1), split, profile, 18, 18);
  CHECK_FALSE(shaped.impossible);
  CHECK(shaped.allocation.spectrum(0, kDelaySensitive) == 5);
  CHECK(shaped.allocation.spectrum(0, kDelayTolerant) == 1);
  CHECK(shaped.allocation.compute(0, kDelaySensitive) == 1);
}

TEST_CASE("shaping leaves a feasible allocation unchanged") {
  const auto profile = single_bs_profile(4.2);
  const Eigen::MatrixXd split(0, kNumServices);
  const auto start = single_bs_allocation(6, 2, 2, 2);
  const auto shaped = shape_decision(start, split, profile, 18, 18);
  CHECK_FALSE(shaped.impossible);
  CHECK(shaped.allocation.spectrum == start.spectrum);
  CHECK(shaped.allocation.compute == start.compute);
}

TEST_CASE("shaping reports a bound beyond capacity") {
  const auto profile = single_bs_profile(20.0);
  const Eigen::MatrixXd split(0, kNumServices);
  const auto shaped = shape_decision(single_bs_allocation(3, 3, 1, 1), split, profile, 18, 18);
  CHECK(shaped.impossible);
  CHECK(shaped.allocation.spectrum.row(0).sum() <= 18);
  CHECK(shaped.allocation.spectrum.minCoeff() >= 1);
}

TEST_CASE("shaping takes room from the delay-tolerant service") {
  const auto profile = single_bs_profile(10.5);
  const Eigen::MatrixXd split(0, kNumServices);
  // needs 11 for the delay-sensitive service; 10 + 8 is at capacity already
  const auto shaped = shape_decision(single_bs_allocation(10, 8, 1, 1), split, profile, 18, 18);
  CHECK_FALSE(shaped.impossible);
  CHECK(shaped.allocation.spectrum(0, kDelaySensitive) == 11);
  CHECK(shaped.allocation.spectrum(0, kDelayTolerant) == 7);
}

TEST_CASE("reset state") {
  // densities are normalised by the configured rho_max; the trace itself
  // stays below jam so the handover term is defined
  auto cfg = default_config();
  cfg.flow.max_density = 100.0;
  Environment env(testing::highway_topology(), uniform_trace(48, 100.0), cfg);
  CHECK(env.state_size() == 45);
  CHECK(env.num_days() == 2);
  const State s = env.reset(1);
  CHECK(s.window_index == 24);
  CHECK((s.prev_spectrum.array() == 1.0 / 18.0).all());
  CHECK((s.prev_compute.array() == 1.0 / 18.0).all());
  CHECK((s.densities.array() == 1.0).all());
  const auto v = s.vector();
  CHECK(v.size() == 45);
  CHECK(v[25] == 1.0 / 18.0);
  CHECK_THROWS_AS(env.reset(2), Error);
  CHECK_THROWS_AS(Environment(testing::highway_topology(), Trace{}, default_config()), Error);
}

TEST_CASE("jam windows are rejected") {
  try {
    Environment env(testing::highway_topology(), uniform_trace(24, 120.0), default_config());
    FAIL("expected ZeroVelocity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVelocity);
  }
}

TEST_CASE("state records the previous decision") {
  Environment env(testing::highway_topology(), uniform_trace(24, 30.0), default_config());
  env.reset(0);
  const auto out = env.step(uniform_request(env, 2, 3, 6, 4));
  CHECK((out.next_state.prev_spectrum.col(kDelaySensitive).array() == 2.0 / 18.0).all());
  CHECK((out.next_state.prev_spectrum.col(kDelayTolerant).array() == 3.0 / 18.0).all());
  CHECK((out.next_state.prev_compute.col(kDelaySensitive).array() == 6.0 / 18.0).all());
  CHECK((out.next_state.prev_compute.col(kDelayTolerant).array() == 4.0 / 18.0).all());
  CHECK(out.next_state.window_index == 1);
}

TEST_CASE("both services infeasible costs twice the penalty") {
  Environment env(testing::highway_topology(), uniform_trace(24, 100.0), default_config());
  env.reset(0);
  const auto out = env.step(uniform_request(env, 1, 1, 1, 1));
  CHECK_FALSE(out.info.feasible_u);
  CHECK_FALSE(out.info.feasible_e);
  CHECK(out.info.qos_violation);
  CHECK(std::isinf(out.info.delay_s));
  CHECK(out.reward == -400.0);
}

TEST_CASE("mixed feasibility adds one penalty to the cost") {
  Environment env(testing::highway_topology(), uniform_trace(24, 60.0), default_config());
  env.reset(0);
  const auto out = env.step(uniform_request(env, 2, 1, 16, 1));
  CHECK(out.info.feasible_u);
  CHECK_FALSE(out.info.feasible_e);
  CHECK(out.reward == -(out.info.total_cost + 200.0));
}

TEST_CASE("reward is the negative cost when both services are feasible") {
  Environment env(testing::highway_topology(), uniform_trace(24, 20.0), default_config());
  env.reset(0);
  for (int i = 0; i < 24; ++i) {
    const auto out = env.step(uniform_request(env, 2, 3, 6, 4));
    REQUIRE(out.info.feasible_u);
    REQUIRE(out.info.feasible_e);
    CHECK(out.reward == -out.info.total_cost);
    CHECK(out.info.delay_s < 0.1);
    CHECK_FALSE(out.info.qos_violation);
    CHECK(out.done == (i == 23));
  }
  CHECK(env.done());
  CHECK_THROWS_AS(env.step(uniform_request(env, 2, 3, 6, 4)), Error);
}

TEST_CASE("reconfiguration is charged against the previous window") {
  Environment env(testing::highway_topology(), uniform_trace(24, 20.0), default_config());
  env.reset(0);
  const auto first = env.step(uniform_request(env, 2, 3, 6, 4));
  // from all ones: 5 BSs * (1 + 2) spectrum and (5 + 3) compute units, 5 each
  CHECK(first.info.cost.reconfiguration == doctest::Approx(5.0 * 5.0 * (1 + 2 + 5 + 3)));
  const auto second = env.step(uniform_request(env, 2, 3, 6, 4));
  CHECK(second.info.cost.reconfiguration == 0.0);
}

TEST_CASE("fixed split with shaping repairs the allocation") {
  Environment env(testing::highway_topology(), uniform_trace(24, 40.0), default_config());
  env.reset(0);
  auto req = uniform_request(env, 1, 1, 1, 1);
  req.mode = SplitMode::Fixed;
  req.split = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(env.topology().num_overlapped()), 2, 0.5);
  req.shape = true;
  const auto out = env.step(req);
  CHECK_FALSE(out.info.shaping_impossible);
  CHECK(out.info.feasible_u);
  CHECK(out.info.feasible_e);
  CHECK(out.info.decision.compute.minCoeff() >= 1);
  CHECK(out.info.decision.compute.rowwise().sum().maxCoeff() <= 18);

  env.reset(0);
  req.shape = false;
  const auto raw = env.step(req);
  CHECK_FALSE(raw.info.feasible_u);
}

TEST_CASE("optimised split matches the inner solve") {
  Environment env(testing::highway_topology(), uniform_trace(24, 40.0), default_config());
  env.reset(0);
  const auto req = uniform_request(env, 2, 3, 6, 4);
  const auto out = env.step(req);
  const auto& inner = env.solve_inner(0, req.allocation);
  CHECK(out.info.decision.split == inner.split);
  CHECK(out.info.feasible_u == inner.feasible_u);
  CHECK(env.next_window(23) == 0);
}

TEST_CASE("episodes are deterministic") {
  const auto topo = testing::highway_topology();
  const auto trace = generate_synthetic_trace(3, 2, SyntheticProfile{}, topo, FlowModel{});
  auto run = [&] {
    Environment env(topo, trace, default_config());
    std::mt19937_64 rng(9);
    std::vector<double> rewards;
    env.reset(1);
    while (!env.done()) {
      const auto out = env.step(make_request(env, Algorithm::Raws, random_fractions(5, rng), nullptr));
      rewards.push_back(out.reward);
    }
    return rewards;
  };
  CHECK(run() == run());
}
