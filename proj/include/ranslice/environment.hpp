#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "ranslice/cost_model.hpp"
#include "ranslice/decision.hpp"
#include "ranslice/inner_solver.hpp"
#include "ranslice/service_model.hpp"
#include "ranslice/topology.hpp"
#include "ranslice/traffic.hpp"

namespace ranslice {

struct EnvConfig {
  Services services;
  RadioConfig radio;
  CostWeights weights;
  FlowModel flow;
  int spectrum_capacity = 18;  // S_max per BS
  int compute_capacity = 18;   // C_max per BS
  std::size_t windows_per_episode = 24;
  InnerSolverOptions solver;
};

// Observation: densities / rho_max, then the previous S and C (row-major,
// BS-major) divided by their capacities. Length M + 2 N K.
struct State {
  Eigen::VectorXd densities;
  Eigen::MatrixXd prev_spectrum;  // N x K
  Eigen::MatrixXd prev_compute;   // N x K
  std::size_t window_index = 0;   // trace position this state was observed at

  Eigen::VectorXd vector() const;
};

// Actor output layout: group g = 2 n + r (r = 0 spectrum, r = 1 compute)
// occupies entries [3 g, 3 g + 3): the delay-sensitive share, the
// delay-tolerant share, and the discarded slack.
inline constexpr Eigen::Index kGroupSize = kNumServices + 1;
inline Eigen::Index action_size(std::size_t num_bs) {
  return static_cast<Eigen::Index>(num_bs) * 2 * kGroupSize;
}

struct Allocation {
  Eigen::MatrixXi spectrum;  // N x K
  Eigen::MatrixXi compute;   // N x K
};

// S = max(1, floor(x S_max)); if the clamp pushed a row over capacity the
// largest entries give back one unit at a time.
Allocation decode_action(const Eigen::VectorXd& fractions, std::size_t num_bs, int spectrum_capacity,
                         int compute_capacity);

enum class SplitMode {
  Optimize,  // inner-layer convex solve (RAWS)
  Fixed,     // use the split supplied with the request
};

struct StepRequest {
  Allocation allocation;
  SplitMode mode = SplitMode::Optimize;
  Eigen::MatrixXd split;  // |M_o| x K, read when mode == Fixed
  bool shape = false;     // raise violated S / C for the fixed split
};

struct StepInfo {
  std::size_t window_index = 0;
  SlicingDecision decision;  // what was executed (after shaping)
  double delay_s = 0.0;      // +inf when the delay-sensitive queues are unstable
  CostBreakdown cost;
  double total_cost = 0.0;   // U, also when infeasible
  bool feasible_u = false;
  bool feasible_e = false;
  bool qos_violation = false;
  bool shaping_impossible = false;
};

struct StepOutcome {
  double reward = 0.0;
  State next_state;
  StepInfo info;
  bool done = false;
};

struct ShapeResult {
  Allocation allocation;
  bool impossible = false;
};

// Raises each S / C that violates its stability bound at the given split to
// floor(rhs) + 1, then trims the row back to capacity by taking units from
// the other service, never below 1.
ShapeResult shape_decision(const Allocation& allocation, const Eigen::MatrixXd& split, const LoadProfile& profile,
                           int spectrum_capacity, int compute_capacity);

class Environment {
 public:
  Environment(Topology topology, Trace trace, EnvConfig config);

  const Topology& topology() const noexcept { return topology_; }
  const EnvConfig& config() const noexcept { return config_; }
  const Trace& trace() const noexcept { return trace_; }
  std::size_t num_days() const noexcept { return trace_.size() / config_.windows_per_episode; }
  std::size_t state_size() const noexcept;
  std::size_t split_size() const noexcept { return topology_.num_overlapped() * kNumServices; }
  const LoadProfile& profile(std::size_t window) const { return profiles_.at(window); }
  double handover(std::size_t window) const { return handover_.at(window); }

  // Starts an episode at the first window of the given day.
  State reset(std::size_t day);
  StepOutcome step(const StepRequest& request);
  bool done() const noexcept { return steps_taken_ >= config_.windows_per_episode; }

  struct InnerOutcome {
    Eigen::MatrixXd split;  // |M_o| x K
    bool feasible_u = false;
    bool feasible_e = false;
  };

  // Inner-layer solve for both services at a trace window, memoised on the
  // allocation. Infeasible services get their phase-1 point as the split.
  const InnerOutcome& solve_inner(std::size_t window, const Allocation& allocation);

  std::size_t next_window(std::size_t window) const noexcept { return (window + 1) % trace_.size(); }

 private:
  State observe(std::size_t window) const;

  Topology topology_;
  Trace trace_;
  EnvConfig config_;
  Eigen::VectorXd rates_;
  std::vector<LoadProfile> profiles_;
  std::vector<double> handover_;
  std::map<std::vector<int>, InnerOutcome> inner_cache_;

  std::size_t window_ = 0;
  std::size_t steps_taken_ = 0;
  bool active_ = false;
  SlicingDecision prev_;
};

// Reward from a window's outcome:
// -(U * 1{F_u nonempty} + w_f * sum_k 1{F_k empty}).
double window_reward(double total_cost, bool feasible_u, bool feasible_e, const CostWeights& w);

}  // namespace ranslice
