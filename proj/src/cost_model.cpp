#include "ranslice/cost_model.hpp"

#include <algorithm>

#include "ranslice/errors.hpp"

namespace ranslice {

double operation_cost(const SlicingDecision& decision, const CostWeights& w) {
  return w.operation_spectrum * decision.spectrum.cast<double>().sum() +
         w.operation_compute * decision.compute.cast<double>().sum();
}

double reconfiguration_cost(const SlicingDecision& prev, const SlicingDecision& next, const CostWeights& w) {
  if (prev.spectrum.rows() != next.spectrum.rows() || prev.spectrum.cols() != next.spectrum.cols() ||
      prev.compute.rows() != next.compute.rows() || prev.compute.cols() != next.compute.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "reconfiguration cost: allocation shapes differ");
  }
  const auto ds = (next.spectrum - prev.spectrum).cwiseMax(0).cast<double>().sum();
  const auto dc = (next.compute - prev.compute).cwiseMax(0).cast<double>().sum();
  return w.reconfig_spectrum * ds + w.reconfig_compute * dc;
}

double violation_cost(double delay_s, double max_delay_s, const CostWeights& w) {
  return delay_s > max_delay_s ? w.violation : 0.0;
}

double revenue(double delay_s, double max_delay_s, const CostWeights& w) {
  return w.revenue * std::max(max_delay_s - delay_s, 0.0);
}

double total_cost(const CostBreakdown& c) {
  return c.operation + c.reconfiguration + c.violation - c.revenue;
}

}  // namespace ranslice
