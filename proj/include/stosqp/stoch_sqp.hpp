#pragma once

// Stochastic SQP: noisy gradients, adaptive stepsizes projected onto an
// interval of width theta * beta^2, and the ratio parameter xi.

#include <stosqp/det_sqp.hpp>
#include <stosqp/oracle.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>

namespace stosqp {

/// Fixed Lipschitz constants shared by the stochastic solvers.
struct LipschitzPair {
  double L = 1.0;
  double Gamma = 1.0;
};

struct LipschitzEstimateOptions {
  int points = 10;
  double radius = 1e-4;
  std::uint64_t seed = 0;
  /// Estimates are raised to at least this value (linear functions give 0).
  double floor = 1e-8;
};

/// Largest difference quotient of g and of each row of J over `points`
/// samples x0 + radius z with z uniform on the unit sphere. Gamma is the sum
/// of the per-constraint constants.
inline LipschitzPair estimate_lipschitz(const Problem& p, const LipschitzEstimateOptions& o = {}) {
  if (o.points < 2 || !(o.radius > 0.0)) {
    throw ContractViolation("estimate_lipschitz: need at least two points and radius > 0");
  }
  std::mt19937_64 rng(derive_seed(o.seed, 0x4c495053ULL));
  std::normal_distribution<double> normal;
  std::vector<Vector> xs, gs;
  std::vector<Matrix> Js;
  for (int i = 0; i < o.points; ++i) {
    Vector z(p.n);
    for (auto& e : z) e = normal(rng);
    const Vector x = p.x0 + o.radius * z.normalized();
    xs.push_back(x);
    gs.push_back(eval_gradient(p, x));
    Js.push_back(eval_jacobian(p, x));
  }
  double L = 0.0;
  Vector gamma = Vector::Zero(p.m);
  for (int i = 0; i < o.points; ++i) {
    for (int j = i + 1; j < o.points; ++j) {
      const double dx = (xs[i] - xs[j]).norm();
      L = std::max(L, (gs[i] - gs[j]).norm() / dx);
      for (int r = 0; r < p.m; ++r) {
        gamma[r] = std::max(gamma[r], (Js[i].row(r) - Js[j].row(r)).norm() / dx);
      }
    }
  }
  return {std::max(L, o.floor), std::max(gamma.sum(), o.floor)};
}

enum class BetaSchedule { constant, diminishing };

inline std::string_view to_string(BetaSchedule s) {
  return s == BetaSchedule::constant ? "constant" : "diminishing";
}

struct StochConfig {
  double tau_init = 1.0;
  double epsilon = 1e-6;
  double sigma = 0.5;
  double xi_init = 1.0;
  BetaSchedule schedule = BetaSchedule::constant;
  /// beta_k = beta for the constant schedule, beta / (k+1)^beta_exponent otherwise.
  double beta = 1.0;
  double beta_exponent = 0.6;
  double theta = 10.0;
  int max_iter = 1000;
  OracleConfig oracle;
  HessianPolicy h_policy = HessianPolicy::identity;
  InertiaOptions inertia;
  /// Estimated from the problem before iteration 0 when not given.
  std::optional<LipschitzPair> lipschitz;
  LipschitzEstimateOptions estimate;
  /// d is treated as zero when ||d||_inf <= zero_step_tol * max(1, ||x||_inf).
  double zero_step_tol = 1e-14;

  double beta_at(int k) const {
    if (schedule == BetaSchedule::constant) return beta;
    return beta / std::pow(static_cast<double>(k) + 1.0, beta_exponent);
  }

  void validate() const {
    auto in_open01 = [](double v) { return v > 0.0 && v < 1.0; };
    if (!(tau_init > 0.0) || !in_open01(epsilon) || !in_open01(sigma) || !(xi_init > 0.0) ||
        !(beta > 0.0 && beta <= 1.0) || !(theta >= 0.0) || max_iter < 0 ||
        !(beta_exponent > 0.5 && beta_exponent <= 1.0)) {
      throw ContractViolation("StochConfig: parameter out of range");
    }
    if (lipschitz && (!(lipschitz->L > 0.0) || !(lipschitz->Gamma > 0.0))) {
      throw ContractViolation("StochConfig: L and Gamma must be positive");
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {{"tau_init", tau_init},
                        {"epsilon", epsilon},
                        {"sigma", sigma},
                        {"xi_init", xi_init},
                        {"beta_schedule", std::string(to_string(schedule))},
                        {"beta", beta},
                        {"beta_exponent", beta_exponent},
                        {"theta", theta},
                        {"max_iter", max_iter},
                        {"noise", oracle.noise_variance},
                        {"seed", oracle.seed},
                        {"h_policy", std::string(to_string(h_policy))},
                        {"zero_step_tol", zero_step_tol},
                        {"fevals_convention", "one gradient sample per iteration"}};
    if (lipschitz) {
      j["L"] = lipschitz->L;
      j["Gamma"] = lipschitz->Gamma;
    }
    return j;
  }
};

struct StepsizeTrace {
  double alpha_hat_init = 0.0;
  double alpha_tilde_init = 0.0;
  double alpha_hat = 0.0;
  double alpha_tilde = 0.0;
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  double alpha = 0.0;
  Branch branch = Branch::below_one;
};

inline StepsizeTrace stoch_stepsize(double dq_bar, double tau_bar, double xi_bar, double L,
                                    double Gamma, double beta, double theta, double c_norm1,
                                    double d_norm2sq) {
  if (!(d_norm2sq > 0.0)) throw ContractViolation("stoch_stepsize: requires d != 0");
  StepsizeTrace t;
  const double scale = tau_bar * L + Gamma;
  t.alpha_hat_init = beta * dq_bar / (scale * d_norm2sq);
  t.alpha_tilde_init = t.alpha_hat_init - 4.0 * c_norm1 / (scale * d_norm2sq);
  t.interval_lo = beta * xi_bar * tau_bar / scale;
  t.interval_hi = t.interval_lo + theta * beta * beta;
  t.alpha_hat = std::clamp(t.alpha_hat_init, t.interval_lo, t.interval_hi);
  t.alpha_tilde = std::clamp(t.alpha_tilde_init, t.interval_lo, t.interval_hi);
  const auto choice = select_stepsize(t.alpha_hat, t.alpha_tilde);
  t.alpha = choice.alpha;
  t.branch = choice.branch;
  return t;
}

/// Trial merit parameter the deterministic method would compute at x with
/// the true gradient and the given H.
inline TrialValue shadow_trial_tau(const Problem& p, const Vector& x, const Matrix& H,
                                   double sigma = 0.5, const InertiaOptions& inertia = {}) {
  const Vector g = eval_gradient(p, x);
  const Vector c = eval_constraints(p, x);
  const Matrix J = eval_jacobian(p, x);
  const auto sol = solve_kkt(H, J, g, c, inertia);
  const Matrix Hs = H + sol.inertia_shift * Matrix::Identity(p.n, p.n);
  return tau_trial_value(g.dot(sol.d), sol.d.dot(Hs * sol.d), norm1(c), sigma);
}

/// Runs exactly cfg.max_iter iterations; row k holds the state at x_k and the
/// step taken from it. Each row also carries the quantities the deterministic
/// rule would produce along the same iterates from the true gradient.
inline RunRecord run_stochastic(const Problem& p, const StochConfig& cfg,
                                const RunOptions& opts = {}) {
  validate(p);
  cfg.validate();
  solver_detail::Stopwatch clock;
  RunRecord rec = solver_detail::make_record(p, "stochastic", cfg.h_policy);
  rec.seed = cfg.oracle.seed;
  rec.noise = cfg.oracle.noise_variance;
  rec.run_id = p.name + "__stochastic__noise" + nlohmann::json(rec.noise).dump() + "__seed" +
               std::to_string(rec.seed);

  const LipschitzPair lip = cfg.lipschitz ? *cfg.lipschitz : estimate_lipschitz(p, cfg.estimate);
  StochConfig used = cfg;
  used.lipschitz = lip;
  rec.config = used.to_json();

  GradientOracle oracle(cfg.oracle);
  Vector x = p.x0;
  double tau = cfg.tau_init;
  double tau_shadow = cfg.tau_init;
  double xi = cfg.xi_init;
  std::int64_t fevals = 0;

  auto finish = [&](Status s, std::string msg = {}) {
    rec.status = s;
    rec.message = std::move(msg);
    rec.fevals = fevals;
    rec.x_final = x;
    rec.wall_time_s = clock.seconds();
    return rec;
  };

  for (int k = 0; k < cfg.max_iter; ++k) {
    const double f = eval_objective(p, x);
    const Vector c = eval_constraints(p, x);
    const Vector g = eval_gradient(p, x);
    const Matrix J = eval_jacobian(p, x);
    if (!std::isfinite(f) || !c.allFinite() || !g.allFinite() || !J.allFinite()) {
      return finish(Status::numerical_failure, "non-finite function value");
    }
    const auto sample = oracle.sample(g);
    const Vector& gbar = sample.gbar;
    ++fevals;

    IterationRow row;
    solver_detail::fill_state(row, k, f, g, c, J);
    row.fevals = fevals;
    const double beta = cfg.beta_at(k);
    row.beta = beta;
    row.lipschitz = lip.L;
    row.gamma_sum = lip.Gamma;

    Matrix H;
    KktSolution sol, shadow;
    try {
      // The Lagrangian Hessian uses the least-squares multiplier of the sampled
      // gradient. The KKT multiplier grows with the inertia shift, and feeding
      // it back makes the next shift larger still when steps are short.
      H = solver_detail::hessian(p, cfg.h_policy, x, solver_detail::initial_multiplier(gbar, J));
      sol = solve_kkt(H, J, gbar, c, cfg.inertia);
      H.diagonal().array() += sol.inertia_shift;
      shadow = solve_kkt(H, J, g, c, cfg.inertia);
    } catch (const LicqFailure& e) {
      rec.rows.push_back(row);
      return finish(Status::licq_failure, e.what());
    } catch (const IndefiniteKkt& e) {
      rec.rows.push_back(row);
      return finish(Status::indefinite_failure, e.what());
    }
    const Vector& d = sol.d;
    row.inertia_shift = sol.inertia_shift;
    row.d_norm = d.norm();
    row.kkt_dual = norm_inf(g + J.transpose() * sol.y);

    const double c1 = norm1(c);
    const double zero_tol = cfg.zero_step_tol * std::max(1.0, norm_inf(x));

    // Deterministic rule along the same iterates, for diagnostics only.
    if (norm_inf(shadow.d) > zero_tol) {
      const Matrix Hs = H + shadow.inertia_shift * Matrix::Identity(p.n, p.n);
      const auto tu = update_tau(tau_shadow, g.dot(shadow.d), shadow.d.dot(Hs * shadow.d), c1,
                                 cfg.sigma, cfg.epsilon);
      tau_shadow = tu.tau;
      row.tau_trial_shadow = tu.tau_trial.as_double();
    } else {
      row.tau_trial_shadow = TrialValue::infinite().as_double();
    }
    row.tau_shadow = tau_shadow;

    if (norm_inf(d) <= zero_tol) {
      row.tau = tau;
      row.xi = xi;
      row.alpha = 0.0;
      row.branch = Branch::skipped;
      rec.rows.push_back(row);
      continue;
    }

    const double gtd = gbar.dot(d);
    const double dHd = d.dot(H * d);
    const double tau_prev = tau;
    const auto tu = update_tau(tau, gtd, dHd, c1, cfg.sigma, cfg.epsilon);
    tau = tu.tau;
    const double dq = delta_q(gtd, dHd, c1, tau);
    const double d2 = d.squaredNorm();
    const double xi_prev = xi;
    const auto xu = update_xi(xi, dq, tau, d2, cfg.epsilon);
    xi = xu.xi;

    const auto st = stoch_stepsize(dq, tau, xi, lip.L, lip.Gamma, beta, cfg.theta, c1, d2);
    const double lemma_ratio = beta * xi * tau / (tau * lip.L + lip.Gamma);
    row.stepsize_warning = !(lemma_ratio > 0.0 && lemma_ratio <= 1.0);
    row.tau = tau;
    row.tau_trial = tu.tau_trial.as_double();
    row.xi = xi;
    row.xi_trial = xu.xi_trial;
    row.dq = dq;
    row.alpha = st.alpha;
    row.branch = st.branch;
    rec.rows.push_back(row);

    const Vector x_next = x + st.alpha * d;

    if (opts.observer) {
      IterationDetail det;
      det.k = k;
      det.x = x;
      det.d = d;
      det.y = sol.y;
      det.g_used = gbar;
      det.g_true = g;
      det.c = c;
      det.J = J;
      det.H = H;
      det.f = f;
      det.tau_prev = tau_prev;
      det.tau = tau;
      det.tau_trial = tu.tau_trial;
      det.xi_prev = xi_prev;
      det.xi = xi;
      det.xi_trial = xu.xi_trial;
      det.dq = dq;
      det.alpha = st.alpha;
      det.branch = st.branch;
      det.phi_old = phi(f, c, tau);
      det.phi_new = phi(eval_objective(p, x_next), eval_constraints(p, x_next), tau);
      det.alpha_hat_init = st.alpha_hat_init;
      det.alpha_tilde_init = st.alpha_tilde_init;
      det.alpha_hat = st.alpha_hat;
      det.alpha_tilde = st.alpha_tilde;
      det.interval_lo = st.interval_lo;
      det.interval_hi = st.interval_hi;
      det.beta = beta;
      det.lipschitz = lip.L;
      det.gamma = Vector::Constant(1, lip.Gamma);
      det.inertia_shift = sol.inertia_shift;
      det.trials = 1;
      opts.observer(det);
    }

    x = x_next;
  }
  return finish(Status::budget_exhausted);
}

}  // namespace stosqp
