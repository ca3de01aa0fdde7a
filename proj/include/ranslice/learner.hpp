#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ranslice/environment.hpp"
#include "ranslice/mlp.hpp"

namespace ranslice {

enum class Algorithm {
  Raws,    // softmax actor + inner-layer workload distribution
  RawsWo,  // same actor, workload split fixed at 1/2
  Ddpg,    // split fixed at 1/2, decision shaping on the resources
  Td3,     // as Ddpg with twin critics, delayed actor, target smoothing
  Random,  // uniform simplex fractions and uniform split
};

std::string to_string(Algorithm a);
// Accepts raws, raws-wo, ddpg, td3, random.
Algorithm algorithm_from_string(const std::string& name);

struct LearnerConfig {
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::vector<Eigen::Index> hidden{128, 64};
  double gamma = 0.75;
  double tau = 0.005;
  double sigma = 0.05;
  std::size_t minibatch = 64;
  std::size_t buffer_capacity = 100000;
  std::size_t episodes = 1000;
  std::size_t policy_delay = 2;
  double target_noise = 0.01;
  double noise_clip = 0.05;
  double reward_scale = 0.01;  // critic regresses scaled rewards
  double grad_clip = 1.0;      // l2 bound on the actor gradient
  // Quadratic pull of each actor group towards 1/(K+1), added to -Q.
  double uniform_pull = 1.0;
  // Scales the initial output-layer weights of actor and critics.
  double output_init_scale = 0.01;
};

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd a1;  // actor fractions after exploration noise
  Eigen::VectorXd a2;  // split, column-major |M_o| x K
  double reward = 0.0;
  Eigen::VectorXd next_state;
  std::size_t next_window = 0;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}
  void push(Transition t);
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  // Uniform with replacement.
  std::vector<const Transition*> sample(std::size_t n, std::mt19937_64& rng) const;
  const Transition& operator[](std::size_t i) const { return data_[i]; }

 private:
  std::size_t capacity_;
  std::deque<Transition> data_;
};

// Adds N(0, sigma^2) to every entry, clamps to [0, 1] and renormalises each
// group. sigma = 0 returns the input unchanged.
Eigen::VectorXd perturb_simplex(const Eigen::VectorXd& fractions, double sigma, double clip,
                                std::mt19937_64& rng);

Eigen::VectorXd act(const Mlp& actor, const Eigen::VectorXd& state, double sigma, std::mt19937_64& rng);

// Dirichlet(1, ..., 1) fractions for every group.
Eigen::VectorXd random_fractions(std::size_t num_bs, std::mt19937_64& rng);

// One Adam step on the mean squared error; returns the loss before the step.
double critic_update(Mlp& critic, Adam& opt, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets);

// Gradient of -mean Q(s, mu(s), a2) (plus the optional pull of each group
// towards 1/(K+1)) with respect to the actor parameters.
Mlp::Gradients actor_gradient(const Mlp& actor, const Mlp& critic, const Eigen::MatrixXd& critic_inputs,
                              Eigen::Index a1_offset, double uniform_pull = 0.0);

// One Adam step ascending mean Q(s, mu(s), a2) over the batch. a1 occupies
// rows [a1_offset, a1_offset + actor outputs) of the critic input. Returns
// the l2 norm of the actor gradient before clipping.
double actor_update(Mlp& actor, Adam& opt, const Mlp& critic, const Eigen::MatrixXd& critic_inputs,
                    Eigen::Index a1_offset, double grad_clip, double uniform_pull = 0.0);

struct Agent {
  Algorithm algorithm = Algorithm::Raws;
  LearnerConfig config;
  Mlp actor, actor_target;
  Mlp critic, critic_target;
  Mlp critic2, critic2_target;  // Td3 only
  Adam actor_opt, critic_opt, critic2_opt;
  std::size_t updates = 0;

  static Agent create(Algorithm algorithm, const LearnerConfig& config, std::size_t state_size,
                      std::size_t num_bs, std::size_t split_size, std::mt19937_64& rng);
  bool learns() const noexcept { return algorithm != Algorithm::Random; }
};

// Per-window record of a rollout.
struct WindowRecord {
  std::size_t episode = 0;
  std::size_t day = 0;
  std::size_t step = 0;  // 0 .. windows_per_episode - 1
  double reward = 0.0;
  StepInfo info;
};

struct EpisodeMetrics {
  std::size_t episode = 0;
  std::size_t day = 0;
  double mean_reward = 0.0;
  double mean_cost = 0.0;  // -reward per window
  double violation_rate = 0.0;
};

struct TrainResult {
  Agent agent;
  std::vector<EpisodeMetrics> curve;
};

using EpisodeCallback = std::function<void(const EpisodeMetrics&)>;

// One gradient step per window once the buffer holds a minibatch.
TrainResult train(Environment& env, Algorithm algorithm, const LearnerConfig& config, const std::vector<std::size_t>& days,
                  std::uint64_t seed, const EpisodeCallback& on_episode = {});

// Continues training an existing agent (used by train and by tests).
std::vector<EpisodeMetrics> train_agent(Environment& env, Agent& agent, const std::vector<std::size_t>& days,
                                        std::uint64_t seed, const EpisodeCallback& on_episode = {});

// Frozen-policy rollout (sigma = 0) over the given days, in order. For Random
// the seed drives the draws; learned policies ignore it.
std::vector<WindowRecord> evaluate_policy(Environment& env, const Agent& agent, const std::vector<std::size_t>& days,
                                          std::uint64_t seed);

// Builds the environment request for an algorithm from actor fractions.
StepRequest make_request(const Environment& env, Algorithm algorithm, const Eigen::VectorXd& fractions,
                         std::mt19937_64* split_rng);

Eigen::VectorXd flatten_split(const Eigen::MatrixXd& split);

EpisodeMetrics summarize_episode(std::size_t episode, std::size_t day, const std::vector<WindowRecord>& records);

}  // namespace ranslice
