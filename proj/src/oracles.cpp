#include "ranslice/oracles.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <sstream>
#include <vector>

#include "ranslice/errors.hpp"

namespace ranslice::oracles {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBatches = 20;
constexpr double kStudentT19 = 2.093;  // two-sided 95%, 19 dof

enum class EventKind { Arrival, Departure };

struct Event {
  double time;
  EventKind kind;
  // min-heap on time
  bool operator<(const Event& other) const { return time > other.time; }
};

std::vector<double> zone_loads(const InnerInstance& inst, const Eigen::VectorXd& beta) {
  std::vector<double> x(static_cast<std::size_t>(inst.num_bs()));
  for (Eigen::Index n = 0; n < inst.num_bs(); ++n) {
    double v = inst.chi[n];
    for (Eigen::Index j = 0; j < inst.num_overlapped(); ++j) v += inst.psi(j, n) * beta[j];
    x[static_cast<std::size_t>(n)] = v;
  }
  return x;
}

}  // namespace

Mm1SimResult simulate_mm1(double arrival_rate, double service_rate, std::uint64_t num_arrivals,
                          std::uint64_t seed) {
  if (!(arrival_rate > 0.0) || !(service_rate > arrival_rate)) {
    std::ostringstream msg;
    msg << "M/M/1 simulation needs 0 < arrival rate < service rate (got " << arrival_rate << ", "
        << service_rate << ")";
    throw Error(ErrorCode::UnstableParameters, msg.str());
  }
  if (num_arrivals < static_cast<std::uint64_t>(kBatches)) {
    throw Error(ErrorCode::UnstableParameters, "need at least 20 arrivals for batch means");
  }

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> interarrival(arrival_rate);
  std::exponential_distribution<double> service(service_rate);

  std::priority_queue<Event> events;
  std::queue<double> waiting;  // arrival times, front is in service
  std::vector<double> sojourn;
  sojourn.reserve(num_arrivals);

  std::uint64_t generated = 0;
  events.push({interarrival(rng), EventKind::Arrival});
  ++generated;

  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    if (ev.kind == EventKind::Arrival) {
      waiting.push(ev.time);
      if (waiting.size() == 1) events.push({ev.time + service(rng), EventKind::Departure});
      if (generated < num_arrivals) {
        events.push({ev.time + interarrival(rng), EventKind::Arrival});
        ++generated;
      }
    } else {
      sojourn.push_back(ev.time - waiting.front());
      waiting.pop();
      if (!waiting.empty()) events.push({ev.time + service(rng), EventKind::Departure});
    }
  }

  Mm1SimResult out;
  out.samples = sojourn.size();
  const std::size_t batch = sojourn.size() / kBatches;
  std::vector<double> means(kBatches, 0.0);
  double total = 0.0;
  for (double s : sojourn) total += s;
  out.mean_sojourn_s = total / static_cast<double>(sojourn.size());
  for (int b = 0; b < kBatches; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < batch; ++i) sum += sojourn[static_cast<std::size_t>(b) * batch + i];
    means[static_cast<std::size_t>(b)] = sum / static_cast<double>(batch);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= kBatches;
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= (kBatches - 1);
  out.confidence_halfwidth_s = kStudentT19 * std::sqrt(var / kBatches);
  return out;
}

bool reference_stable(const InnerInstance& inst, const Eigen::VectorXd& beta) {
  const auto x = zone_loads(inst, beta);
  for (Eigen::Index n = 0; n < inst.num_bs(); ++n) {
    const double xn = x[static_cast<std::size_t>(n)];
    if (inst.spectrum[n] - inst.kappa_s[n] * xn < 0.0) return false;
    if (inst.compute[n] - inst.kappa_c * xn < 0.0) return false;
  }
  return true;
}

double reference_delay(const InnerInstance& inst, const Eigen::VectorXd& beta) {
  const auto x = zone_loads(inst, beta);
  double d = inst.handover_s;
  if (!(inst.total_workload > 0.0)) return d;
  for (Eigen::Index n = 0; n < inst.num_bs(); ++n) {
    const double xn = x[static_cast<std::size_t>(n)];
    const double mu_s = inst.spectrum[n] / inst.kappa_s[n];
    const double mu_c = inst.compute[n] / inst.kappa_c;
    if (!(mu_s > xn) || !(mu_c > xn)) return kInf;
    d += (xn / inst.total_workload) * (1.0 / (mu_s - xn) + 1.0 / (mu_c - xn));
  }
  return d;
}

GridResult grid_search_inner(const InnerInstance& inst, double step) {
  const Eigen::Index p = inst.num_overlapped();
  if (p > 3) throw Error(ErrorCode::ScaleGuard, "grid oracle limited to 3 overlapped zones");
  if (!(step > 0.0) || step > 1.0) throw Error(ErrorCode::UnstableParameters, "grid step must be in (0, 1]");

  const auto count = static_cast<std::uint64_t>(std::llround(1.0 / step)) + 1;
  std::uint64_t total = 1;
  for (Eigen::Index d = 0; d < p; ++d) total *= count;

  GridResult best;
  best.objective = kInf;
  Eigen::VectorXd beta(p);
  std::vector<std::uint64_t> idx(static_cast<std::size_t>(p), 0);
  for (std::uint64_t it = 0; it < total; ++it) {
    std::uint64_t rem = it;
    for (Eigen::Index d = 0; d < p; ++d) {
      idx[static_cast<std::size_t>(d)] = rem % count;
      rem /= count;
      beta[d] = static_cast<double>(idx[static_cast<std::size_t>(d)]) / static_cast<double>(count - 1);
    }
    ++best.points;
    if (!reference_stable(inst, beta)) continue;
    const double f = reference_delay(inst, beta);
    if (!best.feasible || f < best.objective) {
      best.feasible = true;
      best.objective = f;
      best.beta = beta;
    }
  }
  return best;
}

ConvexityProbe convexity_probe(const InnerInstance& inst, std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Index p = inst.num_overlapped();

  auto draw_interior = [&](Eigen::VectorXd& out, double& f) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      for (Eigen::Index j = 0; j < p; ++j) out[j] = unit(rng);
      f = reference_delay(inst, out);
      if (std::isfinite(f)) return true;
    }
    return false;
  };

  ConvexityProbe probe;
  probe.max_violation = -kInf;
  Eigen::VectorXd b1(p), b2(p);
  for (std::size_t t = 0; t < trials; ++t) {
    double f1 = 0.0, f2 = 0.0;
    if (!draw_interior(b1, f1) || !draw_interior(b2, f2)) continue;
    const double w = unit(rng);
    const Eigen::VectorXd mid = w * b1 + (1.0 - w) * b2;
    const double fm = reference_delay(inst, mid);
    // f2 + w (f1 - f2) is exact when f1 == f2
    const double chord = f2 + w * (f1 - f2);
    probe.max_violation = std::max(probe.max_violation, fm - chord);
    ++probe.trials_used;
  }
  if (probe.trials_used == 0) probe.max_violation = 0.0;
  return probe;
}

}  // namespace ranslice::oracles
