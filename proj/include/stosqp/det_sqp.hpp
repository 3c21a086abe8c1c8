#pragma once

// Deterministic SQP: stepsizes from adaptive Lipschitz constant estimates,
// and the classical backtracking line search on the l1 merit function.

#include <stosqp/merit.hpp>
#include <stosqp/solver_common.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace stosqp {

struct DetConfig {
  double tau_init = 1.0;
  double epsilon = 1e-6;
  double sigma = 0.5;
  double eta = 1e-4;
  double rho = 3.0;
  double L_init = 1.0;
  double gamma_init = 1.0;  // same seed for every constraint
  double nu = 0.5;
  double alpha_init = 1.0;
  int max_iter = 10000;
  double stat_tol = 1e-6;
  double feas_tol = 1e-6;
  /// Estimates at the start of iteration k are shrink_factor times those of k-1.
  double shrink_factor = 0.5;
  /// Lower bound applied at re-initialization; keeps estimates from
  /// underflowing to zero on linear objectives or constraints.
  double estimate_floor = 1e-12;
  int inner_cap = 100;
  int backtrack_cap = 100;
  HessianPolicy h_policy = HessianPolicy::lagrangian;
  InertiaOptions inertia;

  void validate() const {
    auto in_open01 = [](double v) { return v > 0.0 && v < 1.0; };
    if (!(tau_init > 0.0) || !in_open01(epsilon) || !in_open01(sigma) || !in_open01(eta) ||
        !(rho > 1.0) || !(L_init > 0.0) || !(gamma_init > 0.0) || !in_open01(nu) ||
        !(alpha_init > 0.0) || !(shrink_factor > 0.0 && shrink_factor <= 1.0) ||
        max_iter < 0) {
      throw ContractViolation("DetConfig: parameter out of range");
    }
  }

  nlohmann::json to_json() const {
    return {{"tau_init", tau_init},   {"epsilon", epsilon},       {"sigma", sigma},
            {"eta", eta},             {"rho", rho},               {"L_init", L_init},
            {"gamma_init", gamma_init}, {"nu", nu},               {"alpha_init", alpha_init},
            {"max_iter", max_iter},   {"stat_tol", stat_tol},     {"feas_tol", feas_tol},
            {"shrink_factor", shrink_factor}, {"estimate_floor", estimate_floor},
            {"h_policy", std::string(to_string(h_policy))},
            {"fevals_convention", "every objective evaluation, including rejected trial points"}};
  }
};

struct LipschitzEstimates {
  double L = 1.0;
  Vector gamma;
  double Gamma() const { return gamma.sum(); }
};

struct StepsizeCandidates {
  double alpha_hat;
  double alpha_tilde;
};

inline StepsizeCandidates stepsize_candidates(double dq, double tau, double L, double Gamma,
                                              double c_norm1, double d_norm2sq, double eta) {
  const double scale = (tau * L + Gamma) * d_norm2sq;
  const double alpha_hat = 2.0 * (1.0 - eta) * dq / scale;
  return {alpha_hat, alpha_hat - 4.0 * c_norm1 / scale};
}

struct StepsizeChoice {
  double alpha;
  Branch branch;
};

/// Minimizer of the piecewise upper model: before, at, or after the kink at 1.
inline StepsizeChoice select_stepsize(double alpha_hat, double alpha_tilde) {
  if (alpha_hat < 1.0) return {alpha_hat, Branch::below_one};
  if (alpha_tilde <= 1.0) return {1.0, Branch::unit};
  return {alpha_tilde, Branch::above_one};
}

struct LipschitzCheck {
  bool ok = true;
  bool violated_f = false;
  std::vector<int> violated_c;
};

/// Tests the Lipschitz upper bounds at the trial point x + alpha d from
/// already evaluated trial values. Non-finite trial values count as violations.
inline LipschitzCheck lipschitz_check(double f_trial, const Vector& c_trial, double f,
                                      double gtd, const Vector& c, const Vector& Jd,
                                      double alpha, double d_norm2sq, double L,
                                      const Vector& gamma) {
  LipschitzCheck out;
  const double quad = 0.5 * alpha * alpha * d_norm2sq;
  if (!std::isfinite(f_trial) || !(f_trial <= f + alpha * gtd + L * quad)) {
    out.violated_f = true;
  }
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double bound = std::abs(c[i] + alpha * Jd[i]) + gamma[i] * quad;
    if (!std::isfinite(c_trial[i]) || !(std::abs(c_trial[i]) <= bound)) {
      out.violated_c.push_back(static_cast<int>(i));
    }
  }
  out.ok = !out.violated_f && out.violated_c.empty();
  return out;
}

inline LipschitzCheck lipschitz_valid(const Problem& p, const Vector& x, const Vector& d,
                                      double alpha, double f, const Vector& g, const Vector& c,
                                      const Matrix& J, double L, const Vector& gamma) {
  const Vector xt = x + alpha * d;
  return lipschitz_check(eval_objective(p, xt), eval_constraints(p, xt), f, g.dot(d), c, J * d,
                         alpha, d.squaredNorm(), L, gamma);
}

namespace det_detail {

/// Result of one stepsize search.
struct Step {
  bool found = false;
  double alpha = 0.0;
  Branch branch = Branch::backtrack;
  double f_new = 0.0;
  Vector c_new;
  int trials = 0;
};

struct AdaptiveRule {
  LipschitzEstimates est;
  const DetConfig* cfg;

  AdaptiveRule(const DetConfig& c, int m) : cfg(&c) {
    est.L = c.L_init;
    est.gamma = Vector::Constant(m, c.gamma_init);
  }

  static constexpr const char* name = "adaptive";

  template <class Ctx>
  Step search(const Problem& p, Ctx& ctx) {
    Step out;
    est.L = std::max(cfg->shrink_factor * est.L, std::min(cfg->estimate_floor, est.L));
    est.gamma = (cfg->shrink_factor * est.gamma)
                    .cwiseMax(est.gamma.cwiseMin(cfg->estimate_floor));
    const double d2 = ctx.d.squaredNorm();
    const double gtd = ctx.g.dot(ctx.d);
    const Vector Jd = ctx.J * ctx.d;
    const double c1 = norm1(ctx.c);
    const double phi_old = phi(ctx.f, ctx.c, ctx.tau);
    for (int j = 0; j < cfg->inner_cap; ++j) {
      const auto cand = stepsize_candidates(ctx.dq, ctx.tau, est.L, est.Gamma(), c1, d2, cfg->eta);
      const auto choice = select_stepsize(cand.alpha_hat, cand.alpha_tilde);
      const Vector xt = ctx.x + choice.alpha * ctx.d;
      const double ft = eval_objective(p, xt);
      const Vector ct = eval_constraints(p, xt);
      ++ctx.fevals;
      out.trials = j + 1;
      const auto lc = lipschitz_check(ft, ct, ctx.f, gtd, ctx.c, Jd, choice.alpha, d2, est.L, est.gamma);
      const double phi_new = phi(ft, ct, ctx.tau);
      const bool decrease = std::isfinite(phi_new) &&
                            sufficient_decrease(phi_new, phi_old, choice.alpha, ctx.dq, cfg->eta);
      if (lc.ok || decrease) {
        out.found = true;
        out.alpha = choice.alpha;
        out.branch = choice.branch;
        out.f_new = ft;
        out.c_new = ct;
        ctx.alpha_hat = cand.alpha_hat;
        ctx.alpha_tilde = cand.alpha_tilde;
        return out;
      }
      if (lc.violated_f) est.L *= cfg->rho;
      for (int i : lc.violated_c) est.gamma[i] *= cfg->rho;
    }
    return out;
  }
};

struct BacktrackRule {
  const DetConfig* cfg;
  BacktrackRule(const DetConfig& c, int) : cfg(&c) {}

  static constexpr const char* name = "linesearch";

  template <class Ctx>
  Step search(const Problem& p, Ctx& ctx) {
    Step out;
    const double phi_old = phi(ctx.f, ctx.c, ctx.tau);
    double alpha = cfg->alpha_init;
    for (int j = 0; j <= cfg->backtrack_cap; ++j, alpha *= cfg->nu) {
      const Vector xt = ctx.x + alpha * ctx.d;
      const double ft = eval_objective(p, xt);
      const Vector ct = eval_constraints(p, xt);
      ++ctx.fevals;
      out.trials = j + 1;
      const double phi_new = phi(ft, ct, ctx.tau);
      if (std::isfinite(phi_new) && sufficient_decrease(phi_new, phi_old, alpha, ctx.dq, cfg->eta)) {
        out.found = true;
        out.alpha = alpha;
        out.branch = Branch::backtrack;
        out.f_new = ft;
        out.c_new = ct;
        return out;
      }
    }
    return out;
  }

  double lipschitz() const { return IterationRow::none; }
};

struct Context {
  Vector x, g, c, d, y;
  Matrix J, H;
  double f = 0.0;
  double tau = 0.0;
  double dq = 0.0;
  double alpha_hat = 0.0, alpha_tilde = 0.0;
  std::int64_t fevals = 0;
};

template <class Rule>
RunRecord run(const Problem& p, const DetConfig& cfg, const RunOptions& opts) {
  validate(p);
  cfg.validate();
  solver_detail::Stopwatch clock;
  RunRecord rec = solver_detail::make_record(p, Rule::name, cfg.h_policy);
  rec.config = cfg.to_json();

  Rule rule(cfg, p.m);
  Context ctx;
  ctx.x = p.x0;
  ctx.f = eval_objective(p, ctx.x);
  ctx.c = eval_constraints(p, ctx.x);
  ctx.fevals = 1;
  double tau = cfg.tau_init;
  Vector y_prev;
  double stat_scale = 1.0;
  double feas_scale = 1.0;

  auto finish = [&](Status s, std::string msg = {}) {
    rec.status = s;
    rec.message = std::move(msg);
    rec.fevals = ctx.fevals;
    rec.x_final = ctx.x;
    rec.wall_time_s = clock.seconds();
    return rec;
  };

  for (int k = 0;; ++k) {
    ctx.g = eval_gradient(p, ctx.x);
    ctx.J = eval_jacobian(p, ctx.x);
    if (!std::isfinite(ctx.f) || !solver_detail::all_finite(ctx.c) ||
        !solver_detail::all_finite(ctx.g) || !solver_detail::all_finite(ctx.J)) {
      return finish(Status::numerical_failure, "non-finite function value");
    }
    if (k == 0) y_prev = solver_detail::initial_multiplier(ctx.g, ctx.J);

    IterationRow row;
    solver_detail::fill_state(row, k, ctx.f, ctx.g, ctx.c, ctx.J);
    row.fevals = ctx.fevals;

    KktSolution sol;
    try {
      ctx.H = solver_detail::hessian(p, cfg.h_policy, ctx.x, y_prev);
      sol = solve_kkt(ctx.H, ctx.J, ctx.g, ctx.c, cfg.inertia);
    } catch (const LicqFailure& e) {
      rec.rows.push_back(row);
      return finish(Status::licq_failure, e.what());
    } catch (const IndefiniteKkt& e) {
      rec.rows.push_back(row);
      return finish(Status::indefinite_failure, e.what());
    }
    ctx.H.diagonal().array() += sol.inertia_shift;
    ctx.d = sol.d;
    ctx.y = sol.y;
    row.inertia_shift = sol.inertia_shift;
    row.d_norm = ctx.d.norm();

    const auto res = stationarity_residual(ctx.g, ctx.J, ctx.y, ctx.c);
    row.kkt_dual = res.dual;
    if (k == 0) {
      stat_scale = std::max(1.0, res.dual);
      feas_scale = std::max(1.0, res.primal);
    }
    if ((res.dual <= cfg.stat_tol * stat_scale && res.primal <= cfg.feas_tol * feas_scale) ||
        ctx.d.isZero(0.0)) {
      rec.rows.push_back(row);
      return finish(Status::success);
    }
    if (k >= cfg.max_iter) {
      rec.rows.push_back(row);
      return finish(Status::iteration_limit);
    }

    const double gtd = ctx.g.dot(ctx.d);
    const double dHd = ctx.d.dot(ctx.H * ctx.d);
    const double c1 = norm1(ctx.c);
    const double tau_prev = tau;
    const auto tu = update_tau(tau, gtd, dHd, c1, cfg.sigma, cfg.epsilon);
    tau = tu.tau;
    ctx.tau = tau;
    ctx.dq = delta_q(gtd, dHd, c1, tau);
    row.tau = tau;
    row.tau_trial = tu.tau_trial.as_double();
    row.dq = ctx.dq;

    const auto step = rule.search(p, ctx);
    row.trials = step.trials;
    if constexpr (requires { rule.est; }) {
      row.lipschitz = rule.est.L;
      row.gamma_sum = rule.est.Gamma();
    }
    if (!step.found) {
      rec.rows.push_back(row);
      return finish(Status::linesearch_failure, "stepsize search exceeded its trial cap");
    }
    row.alpha = step.alpha;
    row.branch = step.branch;
    rec.rows.push_back(row);

    if (opts.observer) {
      IterationDetail det;
      det.k = k;
      det.x = ctx.x;
      det.d = ctx.d;
      det.y = ctx.y;
      det.g_used = ctx.g;
      det.g_true = ctx.g;
      det.c = ctx.c;
      det.J = ctx.J;
      det.H = ctx.H;
      det.f = ctx.f;
      det.tau_prev = tau_prev;
      det.tau = tau;
      det.tau_trial = tu.tau_trial;
      det.dq = ctx.dq;
      det.alpha = step.alpha;
      det.branch = step.branch;
      det.phi_old = phi(ctx.f, ctx.c, tau);
      det.phi_new = phi(step.f_new, step.c_new, tau);
      det.alpha_hat = ctx.alpha_hat;
      det.alpha_tilde = ctx.alpha_tilde;
      det.inertia_shift = sol.inertia_shift;
      det.trials = step.trials;
      if constexpr (requires { rule.est; }) {
        det.lipschitz = rule.est.L;
        det.gamma = rule.est.gamma;
      }
      opts.observer(det);
    }

    ctx.x += step.alpha * ctx.d;
    ctx.f = step.f_new;
    ctx.c = step.c_new;
    y_prev = ctx.y;
  }
}

}  // namespace det_detail

/// SQP with stepsizes from adaptively estimated Lipschitz constants.
inline RunRecord run_adaptive(const Problem& p, const DetConfig& cfg = {},
                              const RunOptions& opts = {}) {
  return det_detail::run<det_detail::AdaptiveRule>(p, cfg, opts);
}

/// SQP with a backtracking line search on the merit function.
inline RunRecord run_linesearch(const Problem& p, const DetConfig& cfg = {},
                                const RunOptions& opts = {}) {
  return det_detail::run<det_detail::BacktrackRule>(p, cfg, opts);
}

}  // namespace stosqp
