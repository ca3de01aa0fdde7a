#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "ranslice/topology.hpp"

namespace ranslice {

// Greenshields-style fluid flow: speed falls linearly to zero at jam density.
struct FlowModel {
  double free_flow_speed_kmh = 120.0;
  double max_density = 120.0;  // vehicles/km
};

struct TrafficWindow {
  std::size_t window_index = 0;
  Eigen::VectorXd densities;   // vehicles/km, one per zone
  Eigen::VectorXd velocities;  // km/h
};

using Trace = std::vector<TrafficWindow>;

double fluid_flow_velocity(const FlowModel& model, double density);

// Builds a window from densities, filling velocities with the fluid-flow model.
TrafficWindow make_window(std::size_t index, Eigen::VectorXd densities, const FlowModel& model);

// CSV layout: header `window,zone_1,...,zone_M`, one row per window, densities
// in vehicles/km. Doubles are written in shortest round-trip form.
Trace load_trace_csv(const std::filesystem::path& path, const FlowModel& model, std::size_t num_zones);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);

struct SyntheticProfile {
  double base_density = 40.0;
  double diurnal_amplitude = 30.0;
  double phase_rad = -1.5707963267948966;  // trough around midnight, peak mid-afternoon
  double hotspot_center_km = 2.5;
  double hotspot_peak = 25.0;
  double hotspot_width_km = 0.3;
  double noise_std = 3.0;
  std::size_t windows_per_day = 24;
};

// density(m, t) = clamp(base + amplitude * sin(2 pi hour / 24 + phase)
//                       + peak * exp(-(x_m - c)^2 / (2 w^2)) + noise, 0, rho_max)
Trace generate_synthetic_trace(std::uint64_t seed, std::size_t days, const SyntheticProfile& profile,
                               const Topology& topology, const FlowModel& model);

}  // namespace ranslice
