#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ranslice/decision.hpp"
#include "ranslice/topology.hpp"
#include "ranslice/traffic.hpp"

namespace ranslice {

// Arrival/service rates below this are treated as an unstable queue.
inline constexpr double kStabilityEpsilon = 1e-9;

struct ServiceSpec {
  double task_size_bits = 0.0;            // xi
  double compute_cycles = 0.0;            // eta, cycles per task
  double arrival_rate = 0.0;              // lambda, tasks/s per vehicle
  std::optional<double> max_delay_s;      // D_th, delay-sensitive only
};

// Index 0 is the delay-sensitive service, index 1 the delay-tolerant one.
using Services = std::array<ServiceSpec, kNumServices>;

struct RadioConfig {
  double subcarrier_bw_hz = 10e6;
  double vm_cpu_hz = 10e9;
  double handover_delay_s = 0.2;
  double tx_power_w = 0.5;
  double noise_dbm_per_hz = -174.0;
  // Path loss is evaluated no closer than this to the BS.
  double min_distance_km = 0.035;
  // Optional explicit per-BS per-subcarrier rates (bps); empty means derive.
  std::vector<double> rate_override_bps;
};

// Constant arrival aggregates for one window.
//
// load(n, k; beta) = chi(n, k) + sum_j psi[k](j, n) * beta(j, k)
//
// where j runs over overlapped zones. For overlapped zone j with nearer BS a
// and second BS b: psi[k](j, a) = +w, psi[k](j, b) = -w, and chi(b, k)
// already contains w, so beta = 1 sends all of w to a and beta = 0 to b.
struct LoadProfile {
  Eigen::MatrixXd chi;                 // N x K, tasks/s
  std::array<Eigen::MatrixXd, kNumServices> psi;  // per service: |M_o| x N
  Eigen::MatrixXd kappa_s;             // N x K, xi_k / R_n  (subcarriers per task/s)
  Eigen::VectorXd kappa_c;             // K,     eta_k / F   (VMs per task/s)
  Eigen::MatrixXd chi_hat_s;           // N x K, kappa_s * chi
  Eigen::MatrixXd chi_hat_c;           // N x K, kappa_c * chi
  Eigen::VectorXd total_workload;      // K, sum_m lambda_k rho_m L
  Eigen::VectorXd rates_bps;           // N, R_n
  Eigen::VectorXd task_size_bits;      // K, xi_k
  Eigen::VectorXd compute_cycles;      // K, eta_k
  double vm_cpu_hz = 0.0;

  std::size_t num_bs() const noexcept { return static_cast<std::size_t>(chi.rows()); }
  std::size_t num_overlapped() const noexcept { return static_cast<std::size_t>(psi[0].rows()); }

  // Service rates S R_n / xi_k and C F / eta_k (tasks/s).
  double spectrum_service_rate(Eigen::Index n, Eigen::Index k, double subcarriers) const {
    return subcarriers * rates_bps[n] / task_size_bits[k];
  }
  double compute_service_rate(Eigen::Index k, double vms) const {
    return vms * vm_cpu_hz / compute_cycles[k];
  }

  // Per-BS arrival rate of service k for the given split column.
  Eigen::VectorXd arrivals(Eigen::Index k, const Eigen::Ref<const Eigen::VectorXd>& beta) const;
};

double path_loss_db(double distance_km);

// Per-subcarrier Shannon rate averaged over the centers of zones associated
// with the BS, or the override when one is configured.
double compute_rate(const RadioConfig& radio, const Topology& topology, std::size_t bs);
Eigen::VectorXd compute_rates(const RadioConfig& radio, const Topology& topology);

LoadProfile build_load_profile(const Topology& topology, const TrafficWindow& window,
                               const Services& services, const RadioConfig& radio,
                               const Eigen::VectorXd& rates_bps);

// M/M/1 sojourn 1 / (mu - lambda); throws UnstableQueue when mu - lambda <= eps.
double mm1_sojourn(double service_rate, double arrival_rate);

double offload_delay(const LoadProfile& profile, int subcarriers,
                     const Eigen::Ref<const Eigen::VectorXd>& beta_u, std::size_t bs);
double process_delay(const LoadProfile& profile, int vms,
                     const Eigen::Ref<const Eigen::VectorXd>& beta_u, std::size_t bs);

// D_H * N / (lambda_u * sum_m L / v_m), with v converted to km/s.
double handover_delay(const Topology& topology, const TrafficWindow& window,
                      const ServiceSpec& service_u, double handover_delay_s);

// Workload-weighted mean of per-BS offload + processing delay plus the
// handover term. Returns the handover term alone when there is no load.
double average_service_delay(const LoadProfile& profile, const SlicingDecision& decision,
                             double handover_s);

// Margins of the four coupled stability constraint families, in resource
// units (subcarriers / VMs). Stable iff every entry is >= 0.
struct StabilityMargins {
  Eigen::MatrixXd spectrum;  // N x K: S - chi_hat_s - kappa_s * sum psi beta
  Eigen::MatrixXd compute;   // N x K: C - chi_hat_c - kappa_c * sum psi beta

  bool service_stable(Eigen::Index k) const {
    return spectrum.col(k).minCoeff() >= 0.0 && compute.col(k).minCoeff() >= 0.0;
  }
  bool all_stable() const { return service_stable(kDelaySensitive) && service_stable(kDelayTolerant); }
};

StabilityMargins check_stability(const LoadProfile& profile, const SlicingDecision& decision);

}  // namespace ranslice
