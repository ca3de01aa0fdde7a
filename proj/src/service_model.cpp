#include "ranslice/service_model.hpp"

#include <cmath>
#include <sstream>

#include "ranslice/errors.hpp"

namespace ranslice {

Eigen::VectorXd LoadProfile::arrivals(Eigen::Index k, const Eigen::Ref<const Eigen::VectorXd>& beta) const {
  Eigen::VectorXd out = chi.col(k);
  if (psi[static_cast<std::size_t>(k)].rows() > 0) {
    out.noalias() += psi[static_cast<std::size_t>(k)].transpose() * beta;
  }
  return out;
}

double path_loss_db(double distance_km) { return 128.1 + 37.6 * std::log10(distance_km); }

double compute_rate(const RadioConfig& radio, const Topology& topology, std::size_t bs) {
  if (!radio.rate_override_bps.empty()) {
    if (radio.rate_override_bps.size() != topology.num_bs()) {
      throw Error(ErrorCode::DimensionMismatch, "rate override needs one entry per BS");
    }
    return radio.rate_override_bps[bs];
  }
  const double tx_dbm = 10.0 * std::log10(radio.tx_power_w * 1e3);
  const double noise_dbm = radio.noise_dbm_per_hz + 10.0 * std::log10(radio.subcarrier_bw_hz);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t m = 0; m < topology.num_zones; ++m) {
    if (topology.primary_bs[m] != bs && topology.secondary_bs[m] != bs) continue;
    const double d = std::max(std::abs(topology.zone_center_km(m) - topology.bs_positions_km[bs]),
                              radio.min_distance_km);
    const double snr_db = tx_dbm - path_loss_db(d) - noise_dbm;
    sum += radio.subcarrier_bw_hz * std::log2(1.0 + std::pow(10.0, snr_db / 10.0));
    ++count;
  }
  if (count == 0) {
    throw Error(ErrorCode::InvalidGeometry, "BS " + std::to_string(bs) + " serves no zone");
  }
  return sum / static_cast<double>(count);
}

Eigen::VectorXd compute_rates(const RadioConfig& radio, const Topology& topology) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(topology.num_bs()));
  for (std::size_t n = 0; n < topology.num_bs(); ++n) r[static_cast<Eigen::Index>(n)] = compute_rate(radio, topology, n);
  return r;
}

LoadProfile build_load_profile(const Topology& topology, const TrafficWindow& window,
                               const Services& services, const RadioConfig& radio,
                               const Eigen::VectorXd& rates_bps) {
  const auto M = static_cast<Eigen::Index>(topology.num_zones);
  const auto N = static_cast<Eigen::Index>(topology.num_bs());
  const auto Mo = static_cast<Eigen::Index>(topology.num_overlapped());
  if (window.densities.size() != M) {
    throw Error(ErrorCode::DimensionMismatch, "window density vector does not match zone count");
  }
  if (rates_bps.size() != N) throw Error(ErrorCode::DimensionMismatch, "rate vector does not match BS count");

  LoadProfile p;
  p.chi = Eigen::MatrixXd::Zero(N, kNumServices);
  p.kappa_s.resize(N, kNumServices);
  p.kappa_c.resize(kNumServices);
  p.total_workload = Eigen::VectorXd::Zero(kNumServices);
  p.rates_bps = rates_bps;
  p.vm_cpu_hz = radio.vm_cpu_hz;
  p.task_size_bits.resize(kNumServices);
  p.compute_cycles.resize(kNumServices);

  for (Eigen::Index k = 0; k < kNumServices; ++k) {
    const auto& svc = services[static_cast<std::size_t>(k)];
    auto& psi = p.psi[static_cast<std::size_t>(k)];
    psi = Eigen::MatrixXd::Zero(Mo, N);
    p.task_size_bits[k] = svc.task_size_bits;
    p.compute_cycles[k] = svc.compute_cycles;
    p.kappa_c[k] = svc.compute_cycles / radio.vm_cpu_hz;
    for (Eigen::Index n = 0; n < N; ++n) p.kappa_s(n, k) = svc.task_size_bits / rates_bps[n];

    Eigen::Index j = 0;
    for (Eigen::Index m = 0; m < M; ++m) {
      const double workload = svc.arrival_rate * window.densities[m] * topology.zone_length_km;
      p.total_workload[k] += workload;
      const auto um = static_cast<std::size_t>(m);
      const auto a = static_cast<Eigen::Index>(topology.primary_bs[um]);
      if (!topology.is_overlapped(um)) {
        p.chi(a, k) += workload;  // c_{m,n} term
      } else {
        const auto b = static_cast<Eigen::Index>(topology.secondary_bs[um]);
        p.chi(b, k) += workload;  // b_{m,n} term
        psi(j, a) = workload;     // (a - b) lambda rho L
        psi(j, b) = -workload;
        ++j;
      }
    }
  }
  p.chi_hat_s = p.kappa_s.cwiseProduct(p.chi);
  p.chi_hat_c = p.chi * p.kappa_c.asDiagonal();
  return p;
}

double mm1_sojourn(double service_rate, double arrival_rate) {
  const double margin = service_rate - arrival_rate;
  if (!(margin > kStabilityEpsilon)) {
    std::ostringstream msg;
    msg << "unstable M/M/1 queue: service rate " << service_rate << " <= arrival rate " << arrival_rate;
    throw Error(ErrorCode::UnstableQueue, msg.str());
  }
  return 1.0 / margin;
}

double offload_delay(const LoadProfile& profile, int subcarriers,
                     const Eigen::Ref<const Eigen::VectorXd>& beta_u, std::size_t bs) {
  const auto n = static_cast<Eigen::Index>(bs);
  const double mu = profile.spectrum_service_rate(n, kDelaySensitive, subcarriers);
  return mm1_sojourn(mu, profile.arrivals(kDelaySensitive, beta_u)[n]);
}

double process_delay(const LoadProfile& profile, int vms,
                     const Eigen::Ref<const Eigen::VectorXd>& beta_u, std::size_t bs) {
  const auto n = static_cast<Eigen::Index>(bs);
  const double mu = profile.compute_service_rate(kDelaySensitive, vms);
  return mm1_sojourn(mu, profile.arrivals(kDelaySensitive, beta_u)[n]);
}

double handover_delay(const Topology& topology, const TrafficWindow& window,
                      const ServiceSpec& service_u, double handover_delay_s) {
  const std::size_t N = topology.num_bs();
  if (N == 0) return 0.0;
  double sojourn_s = 0.0;
  for (Eigen::Index m = 0; m < window.velocities.size(); ++m) {
    const double v = window.velocities[m];
    if (!(v > 0.0)) {
      throw Error(ErrorCode::ZeroVelocity,
                  "zone " + std::to_string(m) + " has zero velocity; handover delay undefined");
    }
    sojourn_s += topology.zone_length_km / (v / 3600.0);
  }
  return handover_delay_s * static_cast<double>(N) / (service_u.arrival_rate * sojourn_s);
}

double average_service_delay(const LoadProfile& profile, const SlicingDecision& decision,
                             double handover_s) {
  const double total = profile.total_workload[kDelaySensitive];
  if (!(total > 0.0)) return handover_s;
  const Eigen::VectorXd beta = decision.split.col(kDelaySensitive);
  const Eigen::VectorXd load = profile.arrivals(kDelaySensitive, beta);
  double d = handover_s;
  for (std::size_t n = 0; n < profile.num_bs(); ++n) {
    const auto i = static_cast<Eigen::Index>(n);
    const double weight = load[i] / total;
    d += weight * (offload_delay(profile, decision.spectrum(i, kDelaySensitive), beta, n) +
                   process_delay(profile, decision.compute(i, kDelaySensitive), beta, n));
  }
  return d;
}

StabilityMargins check_stability(const LoadProfile& profile, const SlicingDecision& decision) {
  const auto N = static_cast<Eigen::Index>(profile.num_bs());
  StabilityMargins out;
  out.spectrum.resize(N, kNumServices);
  out.compute.resize(N, kNumServices);
  for (Eigen::Index k = 0; k < kNumServices; ++k) {
    const Eigen::VectorXd beta = decision.split.col(k);
    const Eigen::VectorXd moved = profile.arrivals(k, beta) - profile.chi.col(k);
    for (Eigen::Index n = 0; n < N; ++n) {
      out.spectrum(n, k) = decision.spectrum(n, k) - profile.chi_hat_s(n, k) - profile.kappa_s(n, k) * moved[n];
      out.compute(n, k) = decision.compute(n, k) - profile.chi_hat_c(n, k) - profile.kappa_c[k] * moved[n];
    }
  }
  return out;
}

}  // namespace ranslice
