#include "ranslice/learner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ranslice/errors.hpp"

namespace ranslice {

namespace {

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

enum Stream : std::uint64_t { kInit = 1, kDays, kExplore, kSample, kSplit, kEval };

void renormalize_group(Eigen::Ref<Eigen::VectorXd> seg) {
  const double sum = seg.sum();
  if (sum > 0.0) {
    seg /= sum;
  } else {
    seg.setConstant(1.0 / static_cast<double>(seg.size()));
  }
}

void check_finite(const Agent& agent, std::size_t episode, std::size_t step) {
  auto bad = [&](const Mlp& net, const char* name) {
    if (net.all_finite()) return;
    std::ostringstream msg;
    msg << "non-finite parameter in " << name << " after update " << agent.updates << " (episode " << episode
        << ", window " << step << ")";
    throw Error(ErrorCode::NonFiniteParameter, msg.str());
  };
  bad(agent.actor, "actor");
  bad(agent.critic, "critic");
  if (agent.algorithm == Algorithm::Td3) bad(agent.critic2, "critic2");
}

struct Batch {
  Eigen::MatrixXd inputs;       // [s; a1; a2]
  Eigen::MatrixXd next_states;  // s'
  Eigen::VectorXd rewards;
  std::vector<std::size_t> next_windows;
};

Batch stack(const std::vector<const Transition*>& samples) {
  const auto B = static_cast<Eigen::Index>(samples.size());
  const auto& first = *samples.front();
  const Eigen::Index ds = first.state.size(), da = first.a1.size(), dp = first.a2.size();
  Batch b;
  b.inputs.resize(ds + da + dp, B);
  b.next_states.resize(ds, B);
  b.rewards.resize(B);
  b.next_windows.reserve(samples.size());
  for (Eigen::Index i = 0; i < B; ++i) {
    const auto& t = *samples[static_cast<std::size_t>(i)];
    b.inputs.col(i) << t.state, t.a1, t.a2;
    b.next_states.col(i) = t.next_state;
    b.rewards[i] = t.reward;
    b.next_windows.push_back(t.next_window);
  }
  return b;
}

void update(Environment& env, Agent& agent, const Batch& batch, std::mt19937_64& noise_rng) {
  const auto& cfg = agent.config;
  const Eigen::Index B = batch.rewards.size();
  const Eigen::Index ds = batch.next_states.rows();
  const Eigen::Index da = agent.actor.num_outputs();
  const Eigen::Index dp = batch.inputs.rows() - ds - da;

  Eigen::MatrixXd next_a1 = agent.actor_target.forward(batch.next_states);
  if (agent.algorithm == Algorithm::Td3) {
    for (Eigen::Index i = 0; i < B; ++i) {
      next_a1.col(i) = perturb_simplex(next_a1.col(i), cfg.target_noise, cfg.noise_clip, noise_rng);
    }
  }
  Eigen::MatrixXd next_inputs(batch.inputs.rows(), B);
  next_inputs.topRows(ds) = batch.next_states;
  next_inputs.middleRows(ds, da) = next_a1;
  if (agent.algorithm == Algorithm::Raws) {
    const auto& ec = env.config();
    for (Eigen::Index i = 0; i < B; ++i) {
      const auto alloc =
          decode_action(next_a1.col(i), env.topology().num_bs(), ec.spectrum_capacity, ec.compute_capacity);
      next_inputs.col(i).tail(dp) =
          flatten_split(env.solve_inner(batch.next_windows[static_cast<std::size_t>(i)], alloc).split);
    }
  } else {
    next_inputs.bottomRows(dp).setConstant(0.5);
  }

  Eigen::VectorXd next_q = agent.critic_target.forward(next_inputs).row(0).transpose();
  if (agent.algorithm == Algorithm::Td3) {
    next_q = next_q.cwiseMin(agent.critic2_target.forward(next_inputs).row(0).transpose());
  }
  const Eigen::VectorXd targets = cfg.reward_scale * batch.rewards + cfg.gamma * next_q;

  critic_update(agent.critic, agent.critic_opt, batch.inputs, targets);
  if (agent.algorithm == Algorithm::Td3) critic_update(agent.critic2, agent.critic2_opt, batch.inputs, targets);
  ++agent.updates;

  const bool actor_turn = agent.algorithm != Algorithm::Td3 || agent.updates % cfg.policy_delay == 0;
  if (!actor_turn) return;
  actor_update(agent.actor, agent.actor_opt, agent.critic, batch.inputs, ds, cfg.grad_clip, cfg.uniform_pull);
  soft_update(agent.actor_target, agent.actor, cfg.tau);
  soft_update(agent.critic_target, agent.critic, cfg.tau);
  if (agent.algorithm == Algorithm::Td3) soft_update(agent.critic2_target, agent.critic2, cfg.tau);
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Raws: return "raws";
    case Algorithm::RawsWo: return "raws-wo";
    case Algorithm::Ddpg: return "ddpg";
    case Algorithm::Td3: return "td3";
    case Algorithm::Random: return "random";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (auto a : {Algorithm::Raws, Algorithm::RawsWo, Algorithm::Ddpg, Algorithm::Td3, Algorithm::Random}) {
    if (to_string(a) == name) return a;
  }
  throw Error(ErrorCode::ConfigError, "unknown algorithm '" + name + "' (raws, raws-wo, ddpg, td3, random)");
}

void ReplayBuffer::push(Transition t) {
  if (capacity_ == 0) return;
  if (data_.size() == capacity_) data_.pop_front();
  data_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  std::vector<const Transition*> out;
  if (data_.empty()) return out;
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(&data_[pick(rng)]);
  return out;
}

Eigen::VectorXd perturb_simplex(const Eigen::VectorXd& fractions, double sigma, double clip, std::mt19937_64& rng) {
  if (sigma <= 0.0) return fractions;
  std::normal_distribution<double> noise(0.0, sigma);
  Eigen::VectorXd out = fractions;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    double e = noise(rng);
    if (clip > 0.0) e = std::clamp(e, -clip, clip);
    out[i] = std::clamp(out[i] + e, 0.0, 1.0);
  }
  for (Eigen::Index g = 0; g < out.size(); g += kGroupSize) renormalize_group(out.segment(g, kGroupSize));
  return out;
}

Eigen::VectorXd act(const Mlp& actor, const Eigen::VectorXd& state, double sigma, std::mt19937_64& rng) {
  return perturb_simplex(actor.predict(state), sigma, 0.0, rng);
}

Eigen::VectorXd random_fractions(std::size_t num_bs, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Eigen::VectorXd out(action_size(num_bs));
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = expo(rng);
  for (Eigen::Index g = 0; g < out.size(); g += kGroupSize) renormalize_group(out.segment(g, kGroupSize));
  return out;
}

double critic_update(Mlp& critic, Adam& opt, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) {
  Mlp::Cache cache;
  const Eigen::MatrixXd q = critic.forward(inputs, &cache);
  const auto B = static_cast<double>(inputs.cols());
  const Eigen::RowVectorXd diff = q.row(0) - targets.transpose();
  const double loss = diff.squaredNorm() / B;
  const Eigen::MatrixXd upstream = (2.0 / B) * diff;
  opt.step(critic, critic.backward(cache, upstream));
  return loss;
}

Mlp::Gradients actor_gradient(const Mlp& actor, const Mlp& critic, const Eigen::MatrixXd& critic_inputs,
                              Eigen::Index a1_offset, double uniform_pull) {
  const Eigen::Index da = actor.num_outputs();
  const auto B = critic_inputs.cols();
  Mlp::Cache actor_cache;
  const Eigen::MatrixXd a1 = actor.forward(critic_inputs.topRows(a1_offset), &actor_cache);
  Eigen::MatrixXd x = critic_inputs;
  x.middleRows(a1_offset, da) = a1;

  Mlp::Cache critic_cache;
  critic.forward(x, &critic_cache);
  // minimise -mean Q
  const Eigen::MatrixXd upstream = Eigen::MatrixXd::Constant(1, B, -1.0 / static_cast<double>(B));
  Eigen::MatrixXd dx;
  critic.backward(critic_cache, upstream, &dx);
  Eigen::MatrixXd upstream_a1 = dx.middleRows(a1_offset, da);
  if (uniform_pull > 0.0) {
    // + pull * mean ||a1 - 1/(K+1)||^2
    const double centre = 1.0 / static_cast<double>(actor.group_size);
    upstream_a1.array() += (2.0 * uniform_pull / static_cast<double>(B)) * (a1.array() - centre);
  }
  return actor.backward(actor_cache, upstream_a1);
}

double actor_update(Mlp& actor, Adam& opt, const Mlp& critic, const Eigen::MatrixXd& critic_inputs,
                    Eigen::Index a1_offset, double grad_clip, double uniform_pull) {
  auto grad = actor_gradient(actor, critic, critic_inputs, a1_offset, uniform_pull);
  const double norm = std::sqrt(grad.squared_norm());
  if (grad_clip > 0.0 && norm > grad_clip) grad.scale(grad_clip / norm);
  opt.step(actor, grad);
  return norm;
}

Agent Agent::create(Algorithm algorithm, const LearnerConfig& config, std::size_t state_size, std::size_t num_bs,
                    std::size_t split_size, std::mt19937_64& rng) {
  Agent a;
  a.algorithm = algorithm;
  a.config = config;
  const auto ds = static_cast<Eigen::Index>(state_size);
  const Eigen::Index da = action_size(num_bs);
  const auto dp = static_cast<Eigen::Index>(split_size);
  a.actor = Mlp(ds, config.hidden, da, Head::SoftmaxGroups, kGroupSize, rng);
  a.critic = Mlp(ds + da + dp, config.hidden, 1, Head::Linear, 1, rng);
  if (algorithm == Algorithm::Td3) a.critic2 = Mlp(ds + da + dp, config.hidden, 1, Head::Linear, 1, rng);
  a.actor.weights.back() *= config.output_init_scale;
  a.critic.weights.back() *= config.output_init_scale;
  if (algorithm == Algorithm::Td3) a.critic2.weights.back() *= config.output_init_scale;
  a.actor_target = a.actor;
  a.critic_target = a.critic;
  a.critic2_target = a.critic2;
  a.actor_opt = Adam(a.actor, config.actor_lr);
  a.critic_opt = Adam(a.critic, config.critic_lr);
  if (algorithm == Algorithm::Td3) a.critic2_opt = Adam(a.critic2, config.critic_lr);
  return a;
}

Eigen::VectorXd flatten_split(const Eigen::MatrixXd& split) {
  return Eigen::Map<const Eigen::VectorXd>(split.data(), split.size());
}

StepRequest make_request(const Environment& env, Algorithm algorithm, const Eigen::VectorXd& fractions,
                         std::mt19937_64* split_rng) {
  const auto& ec = env.config();
  StepRequest req;
  req.allocation = decode_action(fractions, env.topology().num_bs(), ec.spectrum_capacity, ec.compute_capacity);
  const auto Mo = static_cast<Eigen::Index>(env.topology().num_overlapped());
  switch (algorithm) {
    case Algorithm::Raws:
      req.mode = SplitMode::Optimize;
      break;
    case Algorithm::RawsWo:
    case Algorithm::Ddpg:
    case Algorithm::Td3:
      req.mode = SplitMode::Fixed;
      req.split = Eigen::MatrixXd::Constant(Mo, kNumServices, 0.5);
      req.shape = algorithm != Algorithm::RawsWo;
      break;
    case Algorithm::Random: {
      if (!split_rng) throw Error(ErrorCode::ConfigError, "random policy needs a generator");
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      req.mode = SplitMode::Fixed;
      req.split.resize(Mo, kNumServices);
      for (Eigen::Index k = 0; k < kNumServices; ++k) {
        for (Eigen::Index j = 0; j < Mo; ++j) req.split(j, k) = unit(*split_rng);
      }
      break;
    }
  }
  return req;
}

EpisodeMetrics summarize_episode(std::size_t episode, std::size_t day, const std::vector<WindowRecord>& records) {
  EpisodeMetrics m;
  m.episode = episode;
  m.day = day;
  if (records.empty()) return m;
  double reward = 0.0;
  std::size_t violations = 0;
  for (const auto& r : records) {
    reward += r.reward;
    violations += r.info.qos_violation ? 1 : 0;
  }
  const auto n = static_cast<double>(records.size());
  m.mean_reward = reward / n;
  m.mean_cost = -m.mean_reward;
  m.violation_rate = static_cast<double>(violations) / n;
  return m;
}

std::vector<EpisodeMetrics> train_agent(Environment& env, Agent& agent, const std::vector<std::size_t>& days,
                                        std::uint64_t seed, const EpisodeCallback& on_episode) {
  if (days.empty()) throw Error(ErrorCode::EmptyTrace, "no training days");
  const auto& cfg = agent.config;
  auto day_rng = stream_rng(seed, kDays);
  auto explore_rng = stream_rng(seed, kExplore);
  auto sample_rng = stream_rng(seed, kSample);
  auto split_rng = stream_rng(seed, kSplit);
  std::uniform_int_distribution<std::size_t> pick_day(0, days.size() - 1);
  ReplayBuffer buffer(cfg.buffer_capacity);

  std::vector<EpisodeMetrics> curve;
  curve.reserve(cfg.episodes);
  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    const std::size_t day = days[pick_day(day_rng)];
    State s = env.reset(day);
    std::vector<WindowRecord> records;
    while (!env.done()) {
      const Eigen::VectorXd sv = s.vector();
      const Eigen::VectorXd a1 = agent.algorithm == Algorithm::Random
                                     ? random_fractions(env.topology().num_bs(), explore_rng)
                                     : act(agent.actor, sv, cfg.sigma, explore_rng);
      auto out = env.step(make_request(env, agent.algorithm, a1, &split_rng));
      records.push_back({ep, day, records.size(), out.reward, out.info});
      if (agent.learns()) {
        buffer.push({sv, a1, flatten_split(out.info.decision.split), out.reward, out.next_state.vector(),
                     out.next_state.window_index});
        if (buffer.size() >= cfg.minibatch) {
          update(env, agent, stack(buffer.sample(cfg.minibatch, sample_rng)), explore_rng);
          check_finite(agent, ep, records.size() - 1);
        }
      }
      s = std::move(out.next_state);
    }
    curve.push_back(summarize_episode(ep, day, records));
    if (on_episode) on_episode(curve.back());
  }
  return curve;
}

TrainResult train(Environment& env, Algorithm algorithm, const LearnerConfig& config,
                  const std::vector<std::size_t>& days, std::uint64_t seed, const EpisodeCallback& on_episode) {
  auto init_rng = stream_rng(seed, kInit);
  TrainResult result;
  result.agent = Agent::create(algorithm, config, env.state_size(), env.topology().num_bs(), env.split_size(),
                               init_rng);
  result.curve = train_agent(env, result.agent, days, seed, on_episode);
  return result;
}

std::vector<WindowRecord> evaluate_policy(Environment& env, const Agent& agent, const std::vector<std::size_t>& days,
                                          std::uint64_t seed) {
  auto rng = stream_rng(seed, kEval);
  std::vector<WindowRecord> records;
  for (std::size_t e = 0; e < days.size(); ++e) {
    State s = env.reset(days[e]);
    std::size_t step = 0;
    while (!env.done()) {
      const Eigen::VectorXd a1 = agent.algorithm == Algorithm::Random
                                     ? random_fractions(env.topology().num_bs(), rng)
                                     : agent.actor.predict(s.vector());
      auto out = env.step(make_request(env, agent.algorithm, a1, &rng));
      records.push_back({e, days[e], step++, out.reward, out.info});
      s = std::move(out.next_state);
    }
  }
  return records;
}

}  // namespace ranslice
