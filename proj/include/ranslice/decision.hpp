#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace ranslice {

// Column indices of the two services everywhere an N x K or |M_o| x K
// matrix appears.
inline constexpr Eigen::Index kDelaySensitive = 0;
inline constexpr Eigen::Index kDelayTolerant = 1;
inline constexpr Eigen::Index kNumServices = 2;

// Per-window slicing decision: integer subcarriers and VM instances per
// (BS, service), and the workload split of each overlapped zone per service.
// split(j, k) is the share of overlapped zone j's service-k workload sent to
// the zone's nearer BS.
struct SlicingDecision {
  Eigen::MatrixXi spectrum;  // N x K
  Eigen::MatrixXi compute;   // N x K
  Eigen::MatrixXd split;     // |M_o| x K

  static SlicingDecision all_ones(std::size_t num_bs, std::size_t num_overlapped) {
    SlicingDecision d;
    const auto N = static_cast<Eigen::Index>(num_bs);
    d.spectrum = Eigen::MatrixXi::Ones(N, kNumServices);
    d.compute = Eigen::MatrixXi::Ones(N, kNumServices);
    d.split = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(num_overlapped), kNumServices, 0.5);
    return d;
  }
};

}  // namespace ranslice
