#include <doctest.h>

#include <cmath>
#include <random>

#include "ranslice/environment.hpp"
#include "ranslice/errors.hpp"
#include "ranslice/learner.hpp"
#include "support/fixtures.hpp"

using namespace ranslice;

namespace {

Environment small_env(std::size_t days = 2) {
  EnvConfig cfg;
  cfg.services = testing::default_services();
  const auto topo = testing::highway_topology();
  return Environment(topo, generate_synthetic_trace(5, days, SyntheticProfile{}, topo, FlowModel{}), cfg);
}

LearnerConfig tiny_config() {
  LearnerConfig c;
  c.hidden = {16, 8};
  c.minibatch = 8;
  c.episodes = 2;
  return c;
}

Transition dummy_transition(double reward) {
  Transition t;
  t.state = Eigen::VectorXd::Constant(2, reward);
  t.a1 = Eigen::VectorXd::Zero(3);
  t.a2 = Eigen::VectorXd::Zero(1);
  t.reward = reward;
  t.next_state = t.state;
  return t;
}

}  // namespace

TEST_CASE("algorithm names") {
  for (auto a : {Algorithm::Raws, Algorithm::RawsWo, Algorithm::Ddpg, Algorithm::Td3, Algorithm::Random}) {
    CHECK(algorithm_from_string(to_string(a)) == a);
  }
  CHECK(to_string(Algorithm::RawsWo) == "raws-wo");
  try {
    algorithm_from_string("ppo");
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
}

TEST_CASE("replay buffer evicts the oldest and samples reproducibly") {
  ReplayBuffer buffer(5);
  for (int i = 0; i < 12; ++i) {
    buffer.push(dummy_transition(i));
    CHECK(buffer.size() <= 5);
  }
  CHECK(buffer.size() == 5);
  CHECK(buffer[0].reward == 7.0);
  CHECK(buffer[4].reward == 11.0);
  std::mt19937_64 a(3), b(3);
  const auto sa = buffer.sample(20, a);
  const auto sb = buffer.sample(20, b);
  REQUIRE(sa.size() == 20);
  for (std::size_t i = 0; i < sa.size(); ++i) {
    CHECK(sa[i] == sb[i]);
    CHECK(sa[i]->reward >= 7.0);
  }
}

TEST_CASE("exploration noise") {
  std::mt19937_64 rng(11);
  Mlp actor(6, {8}, 12, Head::SoftmaxGroups, 3, rng);
  const Eigen::VectorXd s = Eigen::VectorXd::Random(6);
  CHECK(act(actor, s, 0.0, rng) == actor.predict(s));

  for (int i = 0; i < 10000; ++i) {
    const auto a = act(actor, s, 0.02 + 0.5 * (i % 3), rng);
    REQUIRE(a.minCoeff() >= 0.0);
    for (Eigen::Index g = 0; g < 12; g += 3) REQUIRE(std::abs(a.segment(g, 3).sum() - 1.0) <= 1e-12);
  }
  std::mt19937_64 r1(5), r2(5);
  CHECK(act(actor, s, 0.02, r1) == act(actor, s, 0.02, r2));
}

TEST_CASE("random fractions decode to the expected mean allocation") {
  std::mt19937_64 rng(12);
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto f = random_fractions(5, rng);
    for (Eigen::Index g = 0; g < f.size(); g += kGroupSize) {
      REQUIRE(std::abs(f.segment(g, kGroupSize).sum() - 1.0) <= 1e-12);
    }
    const auto a = decode_action(f, 5, 18, 18);
    REQUIRE(a.spectrum.rowwise().sum().maxCoeff() <= 18);
    REQUIRE(a.compute.rowwise().sum().maxCoeff() <= 18);
    REQUIRE(a.spectrum.minCoeff() >= 1);
    sum += a.spectrum.cast<double>().sum() + a.compute.cast<double>().sum();
    count += 20;
  }
  // E[max(1, floor(18 x))] for x ~ Beta(1, 2)
  CHECK(sum / count == doctest::Approx(5.617283950617284).epsilon(0.01));
}

TEST_CASE("critic loss for a single sample") {
  std::mt19937_64 rng(13);
  Mlp critic(3, {4}, 1, Head::Linear, 1, rng);
  for (auto& w : critic.weights) w.setZero();
  Adam opt(critic, 1e-3);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 1);
  CHECK(critic_update(critic, opt, x, Eigen::VectorXd::Ones(1)) == 1.0);

  Mlp fitted(3, {4}, 1, Head::Linear, 1, rng);
  const Mlp before = fitted;
  Adam opt2(fitted, 1e-3);
  const Eigen::MatrixXd xs = Eigen::MatrixXd::Random(3, 6);
  const Eigen::VectorXd exact = fitted.forward(xs).row(0).transpose();
  CHECK(critic_update(fitted, opt2, xs, exact) == 0.0);
  for (std::size_t l = 0; l < fitted.weights.size(); ++l) CHECK(fitted.weights[l] == before.weights[l]);
}

TEST_CASE("critic loss falls on a frozen batch") {
  std::mt19937_64 rng(14);
  Mlp critic(5, {32, 16}, 1, Head::Linear, 1, rng);
  Adam opt(critic, 1e-3);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 64);
  Eigen::VectorXd y(64);
  for (Eigen::Index i = 0; i < 64; ++i) y[i] = std::sin(3.0 * x(0, i)) - x(1, i) * x(2, i);
  std::vector<double> losses;
  for (int i = 0; i < 100; ++i) losses.push_back(critic_update(critic, opt, x, y));
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 10; ++i) {
    first += losses[static_cast<std::size_t>(i)];
    last += losses[losses.size() - 1 - static_cast<std::size_t>(i)];
  }
  CHECK(last < 0.5 * first);
}

TEST_CASE("actor gradient") {
  std::mt19937_64 rng(15);
  const Eigen::Index ds = 4, da = 6, dp = 2;
  Mlp actor(ds, {8, 8}, da, Head::SoftmaxGroups, 3, rng);
  Mlp critic(ds + da + dp, {8, 8}, 1, Head::Linear, 1, rng);
  Eigen::MatrixXd inputs = Eigen::MatrixXd::Random(ds + da + dp, 1);

  SUBCASE("matches finite differences of Q(s, mu(s))") {
    const auto g = actor_gradient(actor, critic, inputs, ds);
    auto objective = [&](const Mlp& a) {
      Eigen::MatrixXd x = inputs;
      x.middleRows(ds, da) = a.forward(inputs.topRows(ds));
      return -critic.forward(x)(0, 0);
    };
    const double h = 1e-5;
    double worst = 0.0;
    Mlp probe = actor;
    for (std::size_t l = 0; l < probe.weights.size(); ++l) {
      for (Eigen::Index i = 0; i < probe.weights[l].size(); ++i) {
        double& w = probe.weights[l].data()[i];
        const double keep = w;
        w = keep + h;
        const double up = objective(probe);
        w = keep - h;
        const double down = objective(probe);
        w = keep;
        const double numeric = (up - down) / (2 * h);
        const double analytic = g.weights[l].data()[i];
        worst = std::max(worst, std::abs(analytic - numeric) / std::max(1e-6, std::abs(analytic) + std::abs(numeric)));
      }
    }
    CHECK(worst <= 1e-4);
  }

  SUBCASE("critic blind to a1 gives no gradient") {
    Mlp blind = critic;
    blind.weights[0].middleCols(ds, da).setZero();
    CHECK(actor_gradient(actor, blind, inputs, ds).squared_norm() == 0.0);
    Adam opt(actor, 1e-4);
    CHECK(actor_update(actor, opt, blind, inputs, ds, 1.0) == 0.0);
  }

  SUBCASE("update keeps the softmax groups on the simplex") {
    Adam opt(actor, 1e-1);
    const Eigen::MatrixXd batch = Eigen::MatrixXd::Random(ds + da + dp, 16);
    for (int i = 0; i < 20; ++i) actor_update(actor, opt, critic, batch, ds, 1.0);
    const auto y = actor.forward(batch.topRows(ds));
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
      for (Eigen::Index g = 0; g < da; g += 3) CHECK(std::abs(y.col(c).segment(g, 3).sum() - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("training with zero learning rates is a plain rollout") {
  auto env = small_env();
  auto cfg = tiny_config();
  cfg.episodes = 1;
  cfg.actor_lr = 0.0;
  cfg.critic_lr = 0.0;
  cfg.sigma = 0.0;
  const auto result = train(env, Algorithm::Raws, cfg, {1}, 21);
  REQUIRE(result.curve.size() == 1);
  const auto records = evaluate_policy(env, result.agent, {1}, 0);
  const auto eval = summarize_episode(0, 1, records);
  CHECK(result.curve[0].mean_reward == eval.mean_reward);
  CHECK(result.curve[0].violation_rate == eval.violation_rate);
  CHECK(result.agent.updates > 0);
}

TEST_CASE("training is deterministic for a seed") {
  for (auto algo : {Algorithm::Raws, Algorithm::Td3, Algorithm::Random}) {
    auto env_a = small_env();
    auto env_b = small_env();
    const auto a = train(env_a, algo, tiny_config(), {0, 1}, 77);
    const auto b = train(env_b, algo, tiny_config(), {0, 1}, 77);
    REQUIRE(a.curve.size() == b.curve.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
      CHECK(a.curve[i].day == b.curve[i].day);
      CHECK(a.curve[i].mean_reward == b.curve[i].mean_reward);
    }
    CHECK(a.agent.actor.weights.back() == b.agent.actor.weights.back());
  }
}

TEST_CASE("non-finite parameters abort training") {
  auto env = small_env();
  std::mt19937_64 rng(1);
  auto cfg = tiny_config();
  auto agent = Agent::create(Algorithm::Ddpg, cfg, env.state_size(), 5, env.split_size(), rng);
  agent.critic.weights[0](0, 0) = std::nan("");
  try {
    train_agent(env, agent, {0}, 3);
    FAIL("expected NonFiniteParameter");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteParameter);
  }
}

TEST_CASE("requests per algorithm") {
  auto env = small_env(1);
  std::mt19937_64 rng(2);
  const auto f = random_fractions(5, rng);
  const auto mo = static_cast<Eigen::Index>(env.topology().num_overlapped());
  CHECK(make_request(env, Algorithm::Raws, f, nullptr).mode == SplitMode::Optimize);
  const auto wo = make_request(env, Algorithm::RawsWo, f, nullptr);
  CHECK(wo.mode == SplitMode::Fixed);
  CHECK_FALSE(wo.shape);
  CHECK((wo.split.array() == 0.5).all());
  const auto ddpg = make_request(env, Algorithm::Ddpg, f, nullptr);
  CHECK(ddpg.shape);
  CHECK(ddpg.split.rows() == mo);
  const auto rnd = make_request(env, Algorithm::Random, f, &rng);
  CHECK(rnd.split.minCoeff() >= 0.0);
  CHECK(rnd.split.maxCoeff() <= 1.0);
  CHECK_THROWS_AS(make_request(env, Algorithm::Random, f, nullptr), Error);
}
