#include "ranslice/topology.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ranslice/errors.hpp"

namespace ranslice {

namespace {

constexpr double kCoverageTolKm = 1e-9;

}  // namespace

Topology build_topology(double road_length_km, double zone_length_km,
                        const std::vector<double>& bs_positions_km, double radius_km) {
  if (!(road_length_km > 0.0) || !(zone_length_km > 0.0)) {
    throw Error(ErrorCode::InvalidGeometry, "road and zone lengths must be positive");
  }
  if (!(radius_km > 0.0)) {
    throw Error(ErrorCode::InvalidGeometry, "coverage radius must be positive");
  }
  if (bs_positions_km.empty()) {
    throw Error(ErrorCode::InvalidGeometry, "at least one base station is required");
  }
  if (!std::is_sorted(bs_positions_km.begin(), bs_positions_km.end())) {
    throw Error(ErrorCode::InvalidGeometry, "base station positions must be sorted ascending");
  }
  const double ratio = road_length_km / zone_length_km;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "road length " << road_length_km << " km is not an integer multiple of zone length "
        << zone_length_km << " km";
    throw Error(ErrorCode::InvalidGeometry, msg.str());
  }

  Topology topo;
  topo.road_length_km = road_length_km;
  topo.zone_length_km = zone_length_km;
  topo.num_zones = static_cast<std::size_t>(rounded);
  topo.bs_positions_km = bs_positions_km;
  topo.coverage_radius_km = radius_km;

  const std::size_t M = topo.num_zones;
  const std::size_t N = bs_positions_km.size();
  topo.assoc_c = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(N));
  topo.assoc_a = topo.assoc_c;
  topo.assoc_b = topo.assoc_c;
  topo.primary_bs.assign(M, Topology::npos);
  topo.secondary_bs.assign(M, Topology::npos);

  for (std::size_t m = 0; m < M; ++m) {
    const double center = topo.zone_center_km(m);
    std::vector<std::size_t> covering;
    for (std::size_t n = 0; n < N; ++n) {
      if (std::abs(center - bs_positions_km[n]) <= radius_km + kCoverageTolKm) covering.push_back(n);
    }
    if (covering.empty()) {
      std::ostringstream msg;
      msg << "zone " << m << " (center " << center << " km) is outside every coverage disk";
      throw Error(ErrorCode::UncoveredZone, msg.str());
    }
    std::stable_sort(covering.begin(), covering.end(), [&](std::size_t l, std::size_t r) {
      return std::abs(center - bs_positions_km[l]) < std::abs(center - bs_positions_km[r]);
    });
    const auto mi = static_cast<Eigen::Index>(m);
    if (covering.size() == 1) {
      topo.primary_bs[m] = covering[0];
      topo.assoc_c(mi, static_cast<Eigen::Index>(covering[0])) = 1;
      topo.non_overlapped_zone_ids.push_back(m);
    } else {
      topo.primary_bs[m] = covering[0];
      topo.secondary_bs[m] = covering[1];
      topo.assoc_a(mi, static_cast<Eigen::Index>(covering[0])) = 1;
      topo.assoc_b(mi, static_cast<Eigen::Index>(covering[1])) = 1;
      topo.overlapped_zone_ids.push_back(m);
    }
  }
  return topo;
}

}  // namespace ranslice
