#include "ranslice/inner_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "ranslice/errors.hpp"

namespace ranslice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Phase-1 fallback target: just above zero so witnesses land inside rather
// than a rounding error outside.
constexpr double kTinyTarget = 1e-11;

struct ServiceRates {
  Eigen::VectorXd spectrum;  // omega_s
  Eigen::VectorXd compute;   // omega_c
};

ServiceRates service_rates(const InnerInstance& inst) {
  return {inst.spectrum.cwiseQuotient(inst.kappa_s), inst.compute / inst.kappa_c};
}

Eigen::VectorXd loads(const InnerInstance& inst, const Eigen::VectorXd& beta) {
  Eigen::VectorXd x = inst.chi;
  if (inst.num_overlapped() > 0) x.noalias() += inst.psi.transpose() * beta;
  return x;
}

Eigen::VectorXd project_box(const Eigen::VectorXd& v) { return v.cwiseMax(0.0).cwiseMin(1.0); }

double projected_gradient_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
  if (x.size() == 0) return 0.0;
  return (x - project_box(x - g)).lpNorm<Eigen::Infinity>();
}

// Returns false outside the stability region.
bool eval_objective(const InnerInstance& inst, const ServiceRates& rates, const Eigen::VectorXd& beta,
                    double& value, Eigen::VectorXd* grad) {
  const Eigen::VectorXd x = loads(inst, beta);
  const Eigen::Index N = inst.num_bs();
  double sum = 0.0;
  Eigen::VectorXd weight(N);
  for (Eigen::Index n = 0; n < N; ++n) {
    const double gs = rates.spectrum[n] - x[n];
    const double gc = rates.compute[n] - x[n];
    if (!(gs > kStabilityEpsilon) || !(gc > kStabilityEpsilon)) return false;
    sum += rates.spectrum[n] / gs + rates.compute[n] / gc - 2.0;
    weight[n] = rates.spectrum[n] / (gs * gs) + rates.compute[n] / (gc * gc);
  }
  if (!(inst.total_workload > 0.0)) {
    value = inst.handover_s;
    if (grad) *grad = Eigen::VectorXd::Zero(inst.num_overlapped());
    return true;
  }
  value = inst.handover_s + sum / inst.total_workload;
  if (grad) *grad = (inst.psi * weight) / inst.total_workload;
  return true;
}

using EvalFn = std::function<bool(const Eigen::VectorXd&, double&, Eigen::VectorXd&)>;
using HessFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using DoneFn = std::function<bool(const Eigen::VectorXd&)>;

struct PgResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd grad;
  std::size_t iterations = 0;
};

// Box-constrained descent on [0,1]^p. With a Hessian the step is projected
// Newton: Newton on the coordinates not pinned at a bound, plain gradient on
// the pinned ones. Without one, or when the Newton step fails, Barzilai-
// Borwein gradient steps. Armijo backtracking along the projection arc in
// both cases. x0 must be in the domain of eval.
PgResult minimize_on_box(const EvalFn& eval, const HessFn& hess, Eigen::VectorXd x0, std::size_t max_iter,
                         double kkt_tol, const DoneFn& done) {
  PgResult r;
  r.x = std::move(x0);
  eval(r.x, r.value, r.grad);
  const Eigen::Index p = r.x.size();
  const double gmax = p ? r.grad.lpNorm<Eigen::Infinity>() : 0.0;
  double alpha = gmax > 0.0 ? 0.1 / gmax : 1.0;

  Eigen::VectorXd trial, trial_grad;
  double trial_value = 0.0;
  int stalled = 0;
  auto search = [&](const Eigen::VectorXd& dir, double step0) {
    double step = step0;
    for (int bt = 0; bt < 80; ++bt) {
      trial = project_box(r.x + step * dir);
      const Eigen::VectorXd moved = trial - r.x;
      if (moved.lpNorm<Eigen::Infinity>() == 0.0) return false;
      if (eval(trial, trial_value, trial_grad) && trial_value <= r.value + 1e-4 * r.grad.dot(moved)) return true;
      step *= 0.5;
    }
    return false;
  };

  while (r.iterations < max_iter) {
    if (done && done(r.x)) break;
    const double residual = projected_gradient_residual(r.x, r.grad);
    if (residual <= kkt_tol) break;

    bool accepted = false;
    if (hess) {
      const double eps_bound = std::min(1e-3, residual);
      std::vector<Eigen::Index> free;
      for (Eigen::Index j = 0; j < p; ++j) {
        const bool pinned = (r.x[j] <= eps_bound && r.grad[j] > 0.0) || (r.x[j] >= 1.0 - eps_bound && r.grad[j] < 0.0);
        if (!pinned) free.push_back(j);
      }
      const Eigen::MatrixXd H = hess(r.x);
      Eigen::VectorXd dir = -r.grad;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (H(j, j) > 0.0) dir[j] /= H(j, j);
      }
      if (!free.empty()) {
        const auto f = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd Hf(f, f);
        Eigen::VectorXd gf(f);
        for (Eigen::Index a = 0; a < f; ++a) {
          gf[a] = r.grad[free[a]];
          for (Eigen::Index b = 0; b < f; ++b) Hf(a, b) = H(free[a], free[b]);
        }
        // H is singular whenever two zones feed the same BS pair; damp the null space
        const double floor = 1e-12 * std::max(Hf.diagonal().maxCoeff(), 1e-300);
        Hf.diagonal().array() += 1e-6 * Hf.diagonal().array() + floor;
        const Eigen::VectorXd df = -Hf.ldlt().solve(gf);
        if (df.allFinite() && gf.dot(df) < 0.0) {
          for (Eigen::Index a = 0; a < f; ++a) dir[free[a]] = df[a];
        }
      }
      accepted = dir.allFinite() && search(dir, 1.0);
    }
    if (!accepted) accepted = search(-r.grad, alpha);
    if (!accepted) break;  // no representable descent left

    const Eigen::VectorXd s = trial - r.x;
    const Eigen::VectorXd y = trial_grad - r.grad;
    const double sy = s.dot(y);
    alpha = sy > 0.0 ? s.squaredNorm() / sy : alpha * 4.0;
    alpha = std::clamp(alpha, 1e-30, 1e30);

    const double gain = r.value - trial_value;
    r.x = trial;
    r.value = trial_value;
    r.grad = trial_grad;
    ++r.iterations;
    stalled = gain <= 1e-14 * (1.0 + std::abs(r.value)) ? stalled + 1 : 0;
    if (stalled >= 5) break;  // progress is below rounding
  }
  return r;
}

struct Phase1Outcome {
  Eigen::VectorXd beta;
  std::size_t iterations = 0;
};

// Minimizes sum over constraints of ([target - g]^+)^2 with g = omega - x.
Phase1Outcome run_phase1(const InnerInstance& inst, const ServiceRates& rates, Eigen::VectorXd start,
                         double target, std::size_t max_iter) {
  const Eigen::Index N = inst.num_bs();
  auto eval = [&](const Eigen::VectorXd& beta, double& value, Eigen::VectorXd& grad) {
    const Eigen::VectorXd x = loads(inst, beta);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(N);
    value = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
      const double vs = std::max(target - (rates.spectrum[n] - x[n]), 0.0);
      const double vc = std::max(target - (rates.compute[n] - x[n]), 0.0);
      value += vs * vs + vc * vc;
      w[n] = 2.0 * (vs + vc);
    }
    grad = inst.psi * w;
    return true;
  };
  auto done = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd x = loads(inst, beta);
    return ((rates.spectrum - x).array() >= target).all() && ((rates.compute - x).array() >= target).all();
  };
  auto hess = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd x = loads(inst, beta);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
    for (Eigen::Index n = 0; n < N; ++n) {
      if (target - (rates.spectrum[n] - x[n]) > 0.0) c[n] += 2.0;
      if (target - (rates.compute[n] - x[n]) > 0.0) c[n] += 2.0;
    }
    return Eigen::MatrixXd(inst.psi * c.asDiagonal() * inst.psi.transpose());
  };
  auto r = minimize_on_box(eval, hess, std::move(start), max_iter, 0.0, done);
  return {std::move(r.x), r.iterations};
}

void margins_at(const InnerInstance& inst, const ServiceRates& rates, const Eigen::VectorXd& beta,
                double& residual, double& min_margin) {
  const Eigen::VectorXd x = loads(inst, beta);
  residual = 0.0;
  min_margin = kInf;
  for (Eigen::Index n = 0; n < inst.num_bs(); ++n) {
    const double gs = rates.spectrum[n] - x[n];
    const double gc = rates.compute[n] - x[n];
    residual += std::max(-(inst.spectrum[n] - inst.kappa_s[n] * x[n]), 0.0);
    residual += std::max(-(inst.compute[n] - inst.kappa_c * x[n]), 0.0);
    min_margin = std::min({min_margin, gs, gc});
  }
}

}  // namespace

InnerInstance make_inner_instance(const LoadProfile& profile, const SlicingDecision& decision,
                                  Eigen::Index service, double handover_s) {
  InnerInstance inst;
  inst.service = service;
  inst.spectrum = decision.spectrum.col(service).cast<double>();
  inst.compute = decision.compute.col(service).cast<double>();
  inst.kappa_s = profile.kappa_s.col(service);
  inst.kappa_c = profile.kappa_c[service];
  inst.chi = profile.chi.col(service);
  inst.psi = profile.psi[static_cast<std::size_t>(service)];
  inst.total_workload = profile.total_workload[service];
  inst.handover_s = handover_s;
  return inst;
}

ObjectiveValue objective_and_gradient(const InnerInstance& inst, const Eigen::VectorXd& beta) {
  if (beta.size() != inst.num_overlapped()) {
    throw Error(ErrorCode::DimensionMismatch, "beta length differs from overlapped zone count");
  }
  ObjectiveValue out;
  if (!eval_objective(inst, service_rates(inst), beta, out.value, &out.gradient)) {
    throw Error(ErrorCode::UnstableQueue, "objective evaluated outside the stability region");
  }
  return out;
}

Eigen::MatrixXd objective_hessian(const InnerInstance& inst, const Eigen::VectorXd& beta) {
  const auto rates = service_rates(inst);
  const Eigen::VectorXd x = loads(inst, beta);
  const Eigen::Index p = inst.num_overlapped();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
  if (!(inst.total_workload > 0.0)) return h;
  for (Eigen::Index n = 0; n < inst.num_bs(); ++n) {
    const double gs = rates.spectrum[n] - x[n];
    const double gc = rates.compute[n] - x[n];
    if (!(gs > kStabilityEpsilon) || !(gc > kStabilityEpsilon)) {
      throw Error(ErrorCode::UnstableQueue, "Hessian evaluated outside the stability region");
    }
    const double c = 2.0 * rates.spectrum[n] / (gs * gs * gs) + 2.0 * rates.compute[n] / (gc * gc * gc);
    h.noalias() += c * inst.psi.col(n) * inst.psi.col(n).transpose();
  }
  return h / inst.total_workload;
}

FeasibilityResult check_feasibility(const InnerInstance& inst, const InnerSolverOptions& opts) {
  const auto rates = service_rates(inst);
  const Eigen::Index p = inst.num_overlapped();
  FeasibilityResult out;

  Eigen::VectorXd beta = Eigen::VectorXd::Constant(p, 0.5);
  if (p > 0) {
    auto first = run_phase1(inst, rates, beta, 2.0 * opts.interior_margin, opts.max_iterations);
    out.iterations += first.iterations;
    beta = std::move(first.beta);
    double residual = 0.0;
    double min_margin = 0.0;
    margins_at(inst, rates, beta, residual, min_margin);
    if (min_margin < 2.0 * opts.interior_margin) {
      auto second = run_phase1(inst, rates, beta, kTinyTarget, opts.max_iterations);
      out.iterations += second.iterations;
      beta = std::move(second.beta);
    }
  }
  margins_at(inst, rates, beta, out.residual, out.min_margin);
  out.feasible = out.residual <= opts.feasibility_tol;
  out.witness = std::move(beta);
  return out;
}

InnerSolution solve_delay_tolerant(const InnerInstance& inst, const InnerSolverOptions& opts) {
  auto fr = check_feasibility(inst, opts);
  InnerSolution sol;
  sol.feasible = fr.feasible;
  sol.beta = std::move(fr.witness);
  sol.iterations = fr.iterations;
  return sol;
}

InnerSolution solve_delay_sensitive(const InnerInstance& inst, const InnerSolverOptions& opts) {
  InnerSolution sol;
  auto fr = check_feasibility(inst, opts);
  sol.iterations = fr.iterations;
  if (!fr.feasible) return sol;

  const auto rates = service_rates(inst);
  const Eigen::Index N = inst.num_bs();
  const double delta = opts.interior_margin;
  sol.feasible = true;

  double f0 = 0.0;
  Eigen::VectorXd g0;
  if (!eval_objective(inst, rates, fr.witness, f0, &g0)) {
    // Feasible only on the boundary of the stability region: infinite delay.
    sol.beta = std::move(fr.witness);
    sol.objective_delay_s = kInf;
    return sol;
  }
  if (inst.num_overlapped() == 0 || fr.min_margin <= delta) {
    sol.beta = std::move(fr.witness);
    sol.objective_delay_s = f0;
    sol.kkt_residual = projected_gradient_residual(sol.beta, g0);
    return sol;
  }

  const double num_constraints = 2.0 * static_cast<double>(N);
  double mu = opts.barrier_init * std::max(f0 - inst.handover_s, 1e-12) / num_constraints;

  auto barrier_eval = [&](const Eigen::VectorXd& beta, double& value, Eigen::VectorXd& grad) {
    const Eigen::VectorXd x = loads(inst, beta);
    double barrier = 0.0;
    Eigen::VectorXd w(N);
    for (Eigen::Index n = 0; n < N; ++n) {
      const double ss = rates.spectrum[n] - x[n] - delta;
      const double sc = rates.compute[n] - x[n] - delta;
      if (!(ss > 0.0) || !(sc > 0.0)) return false;
      barrier -= std::log(ss) + std::log(sc);
      w[n] = 1.0 / ss + 1.0 / sc;
    }
    double f = 0.0;
    Eigen::VectorXd fg;
    if (!eval_objective(inst, rates, beta, f, &fg)) return false;
    value = f + mu * barrier;
    grad = fg + mu * (inst.psi * w);
    return true;
  };

  auto barrier_hess = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd x = loads(inst, beta);
    Eigen::VectorXd c(N);
    for (Eigen::Index n = 0; n < N; ++n) {
      const double gs = rates.spectrum[n] - x[n];
      const double gc = rates.compute[n] - x[n];
      const double ss = gs - delta;
      const double sc = gc - delta;
      c[n] = (2.0 * rates.spectrum[n] / (gs * gs * gs) + 2.0 * rates.compute[n] / (gc * gc * gc)) /
                 std::max(inst.total_workload, 1e-300) +
             mu * (1.0 / (ss * ss) + 1.0 / (sc * sc));
    }
    return Eigen::MatrixXd(inst.psi * c.asDiagonal() * inst.psi.transpose());
  };

  Eigen::VectorXd beta = std::move(fr.witness);
  double prev_f = f0;
  std::size_t used = 0;
  double f_now = f0;
  while (used < opts.max_iterations) {
    auto r = minimize_on_box(barrier_eval, barrier_hess, beta, opts.max_iterations - used, opts.kkt_tol, {});
    used += r.iterations;
    beta = std::move(r.x);
    eval_objective(inst, rates, beta, f_now, nullptr);
    const bool barrier_negligible = mu * num_constraints <= 1e-2 * opts.objective_tol;
    if (barrier_negligible && std::abs(f_now - prev_f) < opts.objective_tol) break;
    prev_f = f_now;
    mu *= opts.barrier_decay;
  }

  Eigen::VectorXd grad;
  eval_objective(inst, rates, beta, f_now, &grad);
  sol.beta = std::move(beta);
  sol.objective_delay_s = f_now;
  sol.kkt_residual = projected_gradient_residual(sol.beta, grad);
  sol.iterations += used;
  if (used >= opts.max_iterations && sol.kkt_residual > opts.failure_kkt) {
    throw Error(ErrorCode::ConvergenceFailure,
                "inner solver hit the iteration cap; instance: " + to_json(inst).dump());
  }
  return sol;
}

}  // namespace ranslice
