#pragma once

#include "ranslice/decision.hpp"

namespace ranslice {

struct CostWeights {
  double operation_spectrum = 1.0;        // w_os
  double operation_compute = 1.0;         // w_oc
  double reconfig_spectrum = 5.0;         // w_rs
  double reconfig_compute = 5.0;          // w_rc
  double violation = 200.0;               // w_v
  double revenue = 25.0;                  // w_r
  double infeasibility = 200.0;           // w_f
};

struct CostBreakdown {
  double operation = 0.0;
  double reconfiguration = 0.0;
  double violation = 0.0;
  double revenue = 0.0;
};

double operation_cost(const SlicingDecision& decision, const CostWeights& w);

// Only increases are charged; releasing resources is free. The workload
// split never costs anything.
double reconfiguration_cost(const SlicingDecision& prev, const SlicingDecision& next, const CostWeights& w);

// An unstable queue is passed in as an infinite delay.
double violation_cost(double delay_s, double max_delay_s, const CostWeights& w);
double revenue(double delay_s, double max_delay_s, const CostWeights& w);

// U = U_o + U_r + U_q - U_m
double total_cost(const CostBreakdown& c);

}  // namespace ranslice
