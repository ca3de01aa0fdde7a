#pragma once

#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "ranslice/decision.hpp"

namespace ranslice {

// One per-window workload-distribution problem for a single service, with
// the resource allocation fixed. Plain data: the solver and the validation
// oracles both read it, neither owns its semantics.
//
// Loads:   x_n(beta) = chi_n + sum_j psi(j, n) beta_j
// Rates:   omega_s,n = spectrum_n / kappa_s,n   omega_c,n = compute_n / kappa_c
// Stable:  spectrum_n - kappa_s,n x_n >= 0  and  compute_n - kappa_c x_n >= 0
struct InnerInstance {
  Eigen::Index service = kDelaySensitive;
  Eigen::VectorXd spectrum;  // N, allocated subcarriers
  Eigen::VectorXd compute;   // N, allocated VM instances
  Eigen::VectorXd kappa_s;   // N
  double kappa_c = 0.0;
  Eigen::VectorXd chi;       // N
  Eigen::MatrixXd psi;       // |M_o| x N
  double total_workload = 0.0;
  double handover_s = 0.0;

  Eigen::Index num_bs() const noexcept { return chi.size(); }
  Eigen::Index num_overlapped() const noexcept { return psi.rows(); }
};

nlohmann::json to_json(const InnerInstance& inst);
InnerInstance inner_instance_from_json(const nlohmann::json& j);

}  // namespace ranslice
