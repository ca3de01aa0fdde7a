#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace ranslice {

// One-dimensional road segment split into equal zones, with base stations
// placed along it. Immutable once built.
//
// Association matrices are M x N and binary:
//   assoc_c(m, n) = 1   non-overlapped zone m is served only by BS n
//   assoc_a(m, n) = 1   overlapped zone m, nearer of its two BSs
//   assoc_b(m, n) = 1   overlapped zone m, second-nearest BS
struct Topology {
  double road_length_km = 0.0;
  double zone_length_km = 0.0;
  std::size_t num_zones = 0;
  std::vector<double> bs_positions_km;
  double coverage_radius_km = 0.0;

  Eigen::MatrixXi assoc_c;
  Eigen::MatrixXi assoc_a;
  Eigen::MatrixXi assoc_b;

  std::vector<std::size_t> overlapped_zone_ids;
  std::vector<std::size_t> non_overlapped_zone_ids;

  // Per zone: serving BS for non-overlapped zones, the "a" BS otherwise.
  std::vector<std::size_t> primary_bs;
  // Per zone: the "b" BS for overlapped zones, npos otherwise.
  std::vector<std::size_t> secondary_bs;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t num_bs() const noexcept { return bs_positions_km.size(); }
  std::size_t num_overlapped() const noexcept { return overlapped_zone_ids.size(); }
  double zone_center_km(std::size_t m) const noexcept {
    return (static_cast<double>(m) + 0.5) * zone_length_km;
  }
  bool is_overlapped(std::size_t m) const noexcept { return secondary_bs[m] != npos; }
};

// Coverage is judged at the zone center with a 1e-9 km tolerance, so a center
// sitting exactly on the coverage circle counts as covered. Zones covered by
// two or more BSs associate with the two nearest; ties go to the lower index.
Topology build_topology(double road_length_km, double zone_length_km,
                        const std::vector<double>& bs_positions_km, double radius_km);

}  // namespace ranslice
