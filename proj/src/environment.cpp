#include "ranslice/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ranslice/errors.hpp"

namespace ranslice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// x S_max of exactly 1/3 * 18 lands a hair under 6 in binary.
constexpr double kFloorSlack = 1e-9;
constexpr std::size_t kInnerCacheLimit = 200000;

void decode_row(const Eigen::VectorXd& fractions, Eigen::Index offset, int capacity, Eigen::MatrixXi& out,
                Eigen::Index n) {
  int sum = 0;
  for (Eigen::Index k = 0; k < kNumServices; ++k) {
    const double x = std::clamp(fractions[offset + k], 0.0, 1.0);
    const int v = std::max(1, static_cast<int>(std::floor(x * capacity + kFloorSlack)));
    out(n, k) = v;
    sum += v;
  }
  while (sum > capacity) {
    Eigen::Index largest = 0;
    for (Eigen::Index k = 1; k < kNumServices; ++k) {
      if (out(n, k) > out(n, largest)) largest = k;
    }
    --out(n, largest);
    --sum;
  }
}

// Stable iff every margin is strictly positive.
bool service_stable(const StabilityMargins& m, Eigen::Index k) {
  return m.spectrum.col(k).minCoeff() > 0.0 && m.compute.col(k).minCoeff() > 0.0;
}

// One BS row of one resource. need[k] is the smallest stable allocation.
bool shape_row(Eigen::MatrixXi& alloc, Eigen::Index n, const Eigen::Vector2d& rhs, int capacity) {
  int need[kNumServices];
  int value[kNumServices];
  for (Eigen::Index k = 0; k < kNumServices; ++k) {
    need[k] = std::max(1, static_cast<int>(std::floor(rhs[k])) + 1);
    value[k] = alloc(n, k) > rhs[k] ? alloc(n, k) : need[k];
  }
  auto total = [&] { return value[0] + value[1]; };
  // give back surplus above need first, from the larger holder
  while (total() > capacity) {
    Eigen::Index from = -1;
    for (Eigen::Index k = 0; k < kNumServices; ++k) {
      if (value[k] > need[k] && (from < 0 || value[k] - need[k] > value[from] - need[from])) from = k;
    }
    if (from < 0) break;
    --value[from];
  }
  const bool impossible = total() > capacity;
  // delay-tolerant gives way first, then the delay-sensitive one
  for (Eigen::Index k : {kDelayTolerant, kDelaySensitive}) {
    while (total() > capacity && value[k] > 1) --value[k];
  }
  for (Eigen::Index k = 0; k < kNumServices; ++k) alloc(n, k) = value[k];
  return !impossible;
}

}  // namespace

Eigen::VectorXd State::vector() const {
  const Eigen::Index M = densities.size();
  const Eigen::Index NK = prev_spectrum.size();
  Eigen::VectorXd v(M + 2 * NK);
  v.head(M) = densities;
  Eigen::Index i = M;
  for (Eigen::Index n = 0; n < prev_spectrum.rows(); ++n) {
    for (Eigen::Index k = 0; k < prev_spectrum.cols(); ++k) v[i++] = prev_spectrum(n, k);
  }
  for (Eigen::Index n = 0; n < prev_compute.rows(); ++n) {
    for (Eigen::Index k = 0; k < prev_compute.cols(); ++k) v[i++] = prev_compute(n, k);
  }
  return v;
}

Allocation decode_action(const Eigen::VectorXd& fractions, std::size_t num_bs, int spectrum_capacity,
                         int compute_capacity) {
  if (spectrum_capacity < kNumServices || compute_capacity < kNumServices) {
    throw Error(ErrorCode::CapacityImpossible, "capacity below the number of services");
  }
  if (fractions.size() != action_size(num_bs)) {
    throw Error(ErrorCode::DimensionMismatch, "action length does not match 2 * N * (K + 1)");
  }
  const auto N = static_cast<Eigen::Index>(num_bs);
  Allocation a;
  a.spectrum.resize(N, kNumServices);
  a.compute.resize(N, kNumServices);
  for (Eigen::Index n = 0; n < N; ++n) {
    decode_row(fractions, (2 * n) * kGroupSize, spectrum_capacity, a.spectrum, n);
    decode_row(fractions, (2 * n + 1) * kGroupSize, compute_capacity, a.compute, n);
  }
  return a;
}

ShapeResult shape_decision(const Allocation& allocation, const Eigen::MatrixXd& split, const LoadProfile& profile,
                           int spectrum_capacity, int compute_capacity) {
  ShapeResult out{allocation, false};
  const auto N = static_cast<Eigen::Index>(profile.num_bs());
  Eigen::MatrixXd load(N, kNumServices);
  for (Eigen::Index k = 0; k < kNumServices; ++k) load.col(k) = profile.arrivals(k, split.col(k));
  for (Eigen::Index n = 0; n < N; ++n) {
    Eigen::Vector2d rhs_s, rhs_c;
    for (Eigen::Index k = 0; k < kNumServices; ++k) {
      rhs_s[k] = profile.kappa_s(n, k) * load(n, k);
      rhs_c[k] = profile.kappa_c[k] * load(n, k);
    }
    if (!shape_row(out.allocation.spectrum, n, rhs_s, spectrum_capacity)) out.impossible = true;
    if (!shape_row(out.allocation.compute, n, rhs_c, compute_capacity)) out.impossible = true;
  }
  return out;
}

double window_reward(double total_cost, bool feasible_u, bool feasible_e, const CostWeights& w) {
  double r = 0.0;
  if (feasible_u) r += total_cost;
  if (!feasible_u) r += w.infeasibility;
  if (!feasible_e) r += w.infeasibility;
  return -r;
}

Environment::Environment(Topology topology, Trace trace, EnvConfig config)
    : topology_(std::move(topology)), trace_(std::move(trace)), config_(std::move(config)) {
  if (trace_.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no windows");
  if (config_.spectrum_capacity < kNumServices || config_.compute_capacity < kNumServices) {
    throw Error(ErrorCode::CapacityImpossible, "capacity below the number of services");
  }
  rates_ = compute_rates(config_.radio, topology_);
  profiles_.reserve(trace_.size());
  handover_.reserve(trace_.size());
  for (const auto& w : trace_) {
    profiles_.push_back(build_load_profile(topology_, w, config_.services, config_.radio, rates_));
    handover_.push_back(
        handover_delay(topology_, w, config_.services[kDelaySensitive], config_.radio.handover_delay_s));
  }
  prev_ = SlicingDecision::all_ones(topology_.num_bs(), topology_.num_overlapped());
}

std::size_t Environment::state_size() const noexcept {
  return topology_.num_zones + 2 * topology_.num_bs() * static_cast<std::size_t>(kNumServices);
}

State Environment::observe(std::size_t window) const {
  State s;
  s.window_index = window;
  s.densities = trace_[window].densities / config_.flow.max_density;
  s.prev_spectrum = prev_.spectrum.cast<double>() / static_cast<double>(config_.spectrum_capacity);
  s.prev_compute = prev_.compute.cast<double>() / static_cast<double>(config_.compute_capacity);
  return s;
}

State Environment::reset(std::size_t day) {
  if (trace_.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no windows");
  const std::size_t start = day * config_.windows_per_episode;
  if (start >= trace_.size()) throw Error(ErrorCode::EndOfTrace, "day beyond the end of the trace");
  window_ = start;
  steps_taken_ = 0;
  active_ = true;
  prev_ = SlicingDecision::all_ones(topology_.num_bs(), topology_.num_overlapped());
  return observe(window_);
}

const Environment::InnerOutcome& Environment::solve_inner(std::size_t window, const Allocation& allocation) {
  std::vector<int> key;
  key.reserve(1 + 2 * static_cast<std::size_t>(allocation.spectrum.size()));
  key.push_back(static_cast<int>(window));
  key.insert(key.end(), allocation.spectrum.data(), allocation.spectrum.data() + allocation.spectrum.size());
  key.insert(key.end(), allocation.compute.data(), allocation.compute.data() + allocation.compute.size());
  if (auto it = inner_cache_.find(key); it != inner_cache_.end()) return it->second;
  if (inner_cache_.size() >= kInnerCacheLimit) inner_cache_.clear();

  const auto& profile = profiles_.at(window);
  SlicingDecision d{allocation.spectrum, allocation.compute, {}};
  InnerOutcome out;
  out.split.resize(static_cast<Eigen::Index>(topology_.num_overlapped()), kNumServices);

  const auto inst_u = make_inner_instance(profile, d, kDelaySensitive, handover_.at(window));
  const auto sol_u = solve_delay_sensitive(inst_u, config_.solver);
  out.feasible_u = sol_u.feasible;
  out.split.col(kDelaySensitive) =
      sol_u.feasible ? sol_u.beta : check_feasibility(inst_u, config_.solver).witness;
  const auto inst_e = make_inner_instance(profile, d, kDelayTolerant, handover_.at(window));
  const auto sol_e = solve_delay_tolerant(inst_e, config_.solver);
  out.feasible_e = sol_e.feasible;
  out.split.col(kDelayTolerant) = sol_e.beta;
  return inner_cache_.emplace(std::move(key), std::move(out)).first->second;
}

StepOutcome Environment::step(const StepRequest& request) {
  if (!active_ || done()) throw Error(ErrorCode::EndOfTrace, "episode finished; call reset");
  const auto N = static_cast<Eigen::Index>(topology_.num_bs());
  const auto Mo = static_cast<Eigen::Index>(topology_.num_overlapped());
  if (request.allocation.spectrum.rows() != N || request.allocation.compute.rows() != N ||
      request.allocation.spectrum.cols() != kNumServices || request.allocation.compute.cols() != kNumServices) {
    throw Error(ErrorCode::DimensionMismatch, "allocation must be N x K");
  }

  const auto& profile = profiles_[window_];
  const auto& weights = config_.weights;
  StepOutcome out;
  StepInfo& info = out.info;
  info.window_index = window_;
  info.decision.spectrum = request.allocation.spectrum;
  info.decision.compute = request.allocation.compute;

  if (request.mode == SplitMode::Optimize) {
    const auto& inner = solve_inner(window_, request.allocation);
    info.decision.split = inner.split;
    info.feasible_u = inner.feasible_u;
    info.feasible_e = inner.feasible_e;
  } else {
    if (request.split.rows() != Mo || request.split.cols() != kNumServices) {
      throw Error(ErrorCode::DimensionMismatch, "split must be |M_o| x K");
    }
    info.decision.split = request.split.cwiseMax(0.0).cwiseMin(1.0);
    if (request.shape) {
      auto shaped = shape_decision(request.allocation, info.decision.split, profile, config_.spectrum_capacity,
                                   config_.compute_capacity);
      info.decision.spectrum = shaped.allocation.spectrum;
      info.decision.compute = shaped.allocation.compute;
      info.shaping_impossible = shaped.impossible;
    }
    const auto margins = check_stability(profile, info.decision);
    info.feasible_u = service_stable(margins, kDelaySensitive);
    info.feasible_e = service_stable(margins, kDelayTolerant);
  }

  info.delay_s = kInf;
  if (info.feasible_u) {
    try {
      info.delay_s = average_service_delay(profile, info.decision, handover_[window_]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnstableQueue) throw;
    }
  }
  const double d_th = config_.services[kDelaySensitive].max_delay_s.value_or(kInf);
  info.cost.operation = operation_cost(info.decision, weights);
  info.cost.reconfiguration = reconfiguration_cost(prev_, info.decision, weights);
  info.cost.violation = violation_cost(info.delay_s, d_th, weights);
  info.cost.revenue = revenue(info.delay_s, d_th, weights);
  info.total_cost = total_cost(info.cost);
  info.qos_violation = !info.feasible_u || !info.feasible_e || info.delay_s > d_th;
  out.reward = window_reward(info.total_cost, info.feasible_u, info.feasible_e, weights);

  prev_ = info.decision;
  ++steps_taken_;
  window_ = next_window(window_);
  out.done = done();
  out.next_state = observe(window_);
  return out;
}

}  // namespace ranslice
