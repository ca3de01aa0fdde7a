#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "ranslice/inner_instance.hpp"
#include "ranslice/service_model.hpp"

namespace ranslice {

struct InnerSolverOptions {
  double interior_margin = 1e-6;        // delta, tasks/s
  double feasibility_tol = 1e-9;        // phase-1 residual, resource units
  double barrier_init = 1e-2;           // relative to the initial objective excess
  double barrier_decay = 0.1;
  double objective_tol = 1e-8;
  double kkt_tol = 1e-10;
  std::size_t max_iterations = 10000;
  double failure_kkt = 1e-4;
};

struct InnerSolution {
  // Empty when the delay-sensitive problem is infeasible. For the
  // delay-tolerant service it always holds the phase-1 point (in the box).
  Eigen::VectorXd beta;
  double objective_delay_s = 0.0;  // delay-sensitive only
  bool feasible = false;
  std::size_t iterations = 0;
  double kkt_residual = 0.0;
};

struct FeasibilityResult {
  bool feasible = false;
  Eigen::VectorXd witness;
  double residual = 0.0;        // sum of hinge violations, resource units
  double min_margin = 0.0;      // smallest omega - x at the witness, tasks/s
  std::size_t iterations = 0;
};

struct ObjectiveValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

InnerInstance make_inner_instance(const LoadProfile& profile, const SlicingDecision& decision,
                                  Eigen::Index service, double handover_s);

// f(beta) = D_h + (1/Lambda) sum_n [ w_s/(w_s - x_n) + w_c/(w_c - x_n) - 2 ]
// df/dbeta_j = (1/Lambda) sum_n psi(j, n) [ w_s/(w_s - x_n)^2 + w_c/(w_c - x_n)^2 ]
// Throws UnstableQueue when any denominator is <= kStabilityEpsilon.
ObjectiveValue objective_and_gradient(const InnerInstance& inst, const Eigen::VectorXd& beta);

// Analytic Hessian: (1/Lambda) sum_n psi_n psi_n^T [2 w_s/(w_s - x_n)^3 + 2 w_c/(w_c - x_n)^3].
Eigen::MatrixXd objective_hessian(const InnerInstance& inst, const Eigen::VectorXd& beta);

FeasibilityResult check_feasibility(const InnerInstance& inst, const InnerSolverOptions& opts = {});

// Log-barrier on the stability constraints, projected gradient on the box.
InnerSolution solve_delay_sensitive(const InnerInstance& inst, const InnerSolverOptions& opts = {});

// Any feasible split; no objective.
InnerSolution solve_delay_tolerant(const InnerInstance& inst, const InnerSolverOptions& opts = {});

}  // namespace ranslice
