#pragma once

#include <random>

#include <Eigen/Dense>

#include "ranslice/inner_instance.hpp"
#include "ranslice/service_model.hpp"
#include "ranslice/topology.hpp"

namespace ranslice::testing {

inline Topology highway_topology() {
  return build_topology(5.0, 0.2, {0.5, 1.5, 2.5, 3.5, 4.5}, 0.8);
}

inline Services default_services(double lambda_u = 1.0, double lambda_e = 1.0) {
  Services s;
  s[kDelaySensitive] = {0.6e6, 6e8, lambda_u, 0.1};
  s[kDelayTolerant] = {2e6, 2e8, lambda_e, std::nullopt};
  return s;
}

// Two BSs sharing one overlapped zone of workload w, with the same background
// load and allocation on both sides. Optimum split is 1/2.
inline InnerInstance symmetric_instance(double w = 10.0, double background = 5.0, double spectrum = 2.0,
                                        double compute = 3.0) {
  InnerInstance inst;
  inst.spectrum = Eigen::Vector2d(spectrum, spectrum);
  inst.compute = Eigen::Vector2d(compute, compute);
  inst.kappa_s = Eigen::Vector2d(0.6e6 / 70e6, 0.6e6 / 70e6);
  inst.kappa_c = 6e8 / 10e9;
  inst.chi = Eigen::Vector2d(background, background + w);
  inst.psi.resize(1, 2);
  inst.psi << w, -w;
  inst.total_workload = 2.0 * background + w;
  inst.handover_s = 0.005;
  return inst;
}

// Random chain instance: N in [2, 4] BSs, p in [1, max_overlapped]
// overlapped zones each shared by a random adjacent BS pair.
inline InnerInstance random_instance(std::mt19937_64& rng, int max_overlapped = 3,
                                     Eigen::Index service = kDelaySensitive) {
  std::uniform_int_distribution<int> pick_n(2, 4);
  std::uniform_int_distribution<int> pick_p(1, max_overlapped);
  std::uniform_real_distribution<double> rate(50e6, 90e6);
  std::uniform_real_distribution<double> zone_load(2.0, 15.0);
  std::uniform_real_distribution<double> background(0.0, 20.0);
  std::uniform_int_distribution<int> spectrum(1, 4);
  std::uniform_int_distribution<int> compute(1, 6);

  const int N = pick_n(rng);
  const int p = pick_p(rng);
  const double xi = service == kDelaySensitive ? 0.6e6 : 2e6;
  const double eta = service == kDelaySensitive ? 6e8 : 2e8;

  InnerInstance inst;
  inst.service = service;
  inst.spectrum.resize(N);
  inst.compute.resize(N);
  inst.kappa_s.resize(N);
  inst.chi.resize(N);
  inst.kappa_c = eta / 10e9;
  inst.total_workload = 0.0;
  for (int n = 0; n < N; ++n) {
    inst.kappa_s[n] = xi / rate(rng);
    inst.chi[n] = background(rng);
    inst.total_workload += inst.chi[n];
    inst.spectrum[n] = spectrum(rng);
    inst.compute[n] = compute(rng);
  }
  inst.psi = Eigen::MatrixXd::Zero(p, N);
  std::uniform_int_distribution<int> pick_left(0, N - 2);
  std::bernoulli_distribution flip(0.5);
  for (int j = 0; j < p; ++j) {
    const int left = pick_left(rng);
    const int a = flip(rng) ? left : left + 1;
    const int b = a == left ? left + 1 : left;
    const double w = zone_load(rng);
    inst.psi(j, a) = w;
    inst.psi(j, b) = -w;
    inst.chi[b] += w;
    inst.total_workload += w;
  }
  inst.handover_s = 0.005;
  return inst;
}

}  // namespace ranslice::testing
