#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "ranslice/inner_instance.hpp"

// Brute-force and simulation references for the analytic models. Nothing in
// here calls the service model or the inner solver.
namespace ranslice::oracles {

struct Mm1SimResult {
  double mean_sojourn_s = 0.0;
  double confidence_halfwidth_s = 0.0;  // 95%, batch means over 20 batches
  std::uint64_t samples = 0;
};

// Event-driven FIFO single-server queue with Poisson arrivals and
// exponential service.
Mm1SimResult simulate_mm1(double arrival_rate, double service_rate, std::uint64_t num_arrivals,
                          std::uint64_t seed);

struct GridResult {
  bool feasible = false;
  Eigen::VectorXd beta;
  double objective = 0.0;  // average service delay, +inf on the stability boundary
  std::uint64_t points = 0;
};

// Exhaustive scan of beta in {0, step, 2 step, ..., 1}^p. p <= 3.
GridResult grid_search_inner(const InnerInstance& inst, double step);

// Average service delay written as the workload-weighted sum of per-BS M/M/1
// sojourns. Returns +inf when some queue is not strictly stable.
double reference_delay(const InnerInstance& inst, const Eigen::VectorXd& beta);

// True iff every stability margin (resource units) is >= 0 at beta.
bool reference_stable(const InnerInstance& inst, const Eigen::VectorXd& beta);

struct ConvexityProbe {
  double max_violation = 0.0;
  std::size_t trials_used = 0;
};

// Samples interior pairs and convex combinations and reports the largest
// f(t b1 + (1-t) b2) - [t f(b1) + (1-t) f(b2)].
ConvexityProbe convexity_probe(const InnerInstance& inst, std::size_t trials, std::uint64_t seed);

}  // namespace ranslice::oracles
