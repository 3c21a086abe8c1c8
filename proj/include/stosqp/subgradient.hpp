#pragma once

// Baseline: stochastic subgradient method on the exact penalty function
// tau f + ||c||_1 with a fixed tau and the constant stepsize tau / (tau L + Gamma).

#include <stosqp/metrics.hpp>
#include <stosqp/stoch_sqp.hpp>

#include <string>
#include <tuple>
#include <vector>

namespace stosqp {

inline std::vector<double> default_tau_grid() {
  std::vector<double> grid;
  for (int e = -10; e <= 0; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

struct SubgradConfig {
  double tau = 1.0;
  int max_iter = 10000;
  OracleConfig oracle;
  /// Estimated from the problem (same recipe as the stochastic SQP) when not given.
  std::optional<LipschitzPair> lipschitz;
  LipschitzEstimateOptions estimate;
  std::vector<double> tau_grid = default_tau_grid();
  double feas_tol = 1e-6;

  void validate() const {
    if (!(tau > 0.0) || max_iter < 0) throw ContractViolation("SubgradConfig: parameter out of range");
    if (lipschitz && (!(lipschitz->L > 0.0) || !(lipschitz->Gamma > 0.0))) {
      throw ContractViolation("SubgradConfig: L and Gamma must be positive");
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {{"tau", tau},
                        {"max_iter", max_iter},
                        {"noise", oracle.noise_variance},
                        {"seed", oracle.seed},
                        {"fevals_convention", "one gradient sample per iteration"}};
    if (lipschitz) {
      j["L"] = lipschitz->L;
      j["Gamma"] = lipschitz->Gamma;
    }
    return j;
  }
};

/// tau gbar + J^T s with s_i = sign(c_i) and sign(0) = 0, the minimum-norm
/// choice at kinks.
inline Vector penalty_subgradient(const Vector& gbar, const Matrix& J, const Vector& c,
                                  double tau) {
  if (J.cols() != gbar.size() || J.rows() != c.size()) {
    throw ContractViolation("penalty_subgradient: dimension mismatch");
  }
  const Vector s = c.unaryExpr([](double v) { return double((v > 0.0) - (v < 0.0)); });
  return tau * gbar + J.transpose() * s;
}

/// Runs exactly cfg.max_iter iterations; row k is the state at x_k.
inline RunRecord run_subgradient(const Problem& p, const SubgradConfig& cfg,
                                 const RunOptions& opts = {}) {
  validate(p);
  cfg.validate();
  solver_detail::Stopwatch clock;
  RunRecord rec = solver_detail::make_record(p, "subgradient", HessianPolicy::identity);
  rec.h_policy = "none";
  rec.seed = cfg.oracle.seed;
  rec.noise = cfg.oracle.noise_variance;
  rec.run_id = p.name + "__subgradient__noise" + nlohmann::json(rec.noise).dump() + "__seed" +
               std::to_string(rec.seed);

  const LipschitzPair lip = cfg.lipschitz ? *cfg.lipschitz : estimate_lipschitz(p, cfg.estimate);
  SubgradConfig used = cfg;
  used.lipschitz = lip;
  rec.config = used.to_json();
  const double alpha = cfg.tau / (cfg.tau * lip.L + lip.Gamma);

  GradientOracle oracle(cfg.oracle);
  Vector x = p.x0;
  std::int64_t fevals = 0;
  auto finish = [&](Status s, std::string msg = {}) {
    rec.status = s;
    rec.message = std::move(msg);
    rec.fevals = fevals;
    rec.x_final = x;
    rec.wall_time_s = clock.seconds();
    return rec;
  };

  rec.rows.reserve(static_cast<std::size_t>(cfg.max_iter));
  for (int k = 0; k < cfg.max_iter; ++k) {
    const double f = eval_objective(p, x);
    const Vector c = eval_constraints(p, x);
    const Vector g = eval_gradient(p, x);
    const Matrix J = eval_jacobian(p, x);
    if (!std::isfinite(f) || !c.allFinite() || !g.allFinite() || !J.allFinite()) {
      return finish(Status::numerical_failure, "non-finite function value");
    }
    const auto sample = oracle.sample(g);
    ++fevals;
    const Vector step = penalty_subgradient(sample.gbar, J, c, cfg.tau);

    IterationRow row;
    solver_detail::fill_state(row, k, f, g, c, J);
    row.fevals = fevals;
    row.tau = cfg.tau;
    row.alpha = alpha;
    row.branch = Branch::fixed;
    row.d_norm = step.norm();
    row.lipschitz = lip.L;
    row.gamma_sum = lip.Gamma;
    rec.rows.push_back(row);

    if (opts.observer) {
      IterationDetail det;
      det.k = k;
      det.x = x;
      det.d = -step;
      det.g_used = sample.gbar;
      det.g_true = g;
      det.c = c;
      det.J = J;
      det.f = f;
      det.tau_prev = det.tau = cfg.tau;
      det.alpha = alpha;
      det.branch = Branch::fixed;
      det.lipschitz = lip.L;
      det.gamma = Vector::Constant(1, lip.Gamma);
      opts.observer(det);
    }
    x -= alpha * step;
  }
  return finish(Status::budget_exhausted);
}

/// Index of the smallest (feasibility error, optimality error) pair; NaN
/// sorts last and the first index wins exact ties.
inline std::size_t lexicographic_best(const std::vector<ErrorPair>& errors) {
  if (errors.empty()) throw ContractViolation("lexicographic_best: no candidates");
  auto key = [](const ErrorPair& e) {
    auto clean = [](double v) {
      return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    return std::make_tuple(clean(e.feasibility_error), clean(e.optimality_error));
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (key(errors[i]) < key(errors[best])) best = i;
  }
  return best;
}

struct TuneEntry {
  double tau = 0.0;
  ErrorPair errors;
  RunRecord record;
};

struct TuneResult {
  double best_tau = 0.0;
  std::size_t best_index = 0;
  std::vector<TuneEntry> entries;
  const RunRecord& best_record() const { return entries[best_index].record; }
};

/// Runs the seeded instance once per grid value and keeps the tau with the
/// lexicographically smallest (feasibility error, optimality error). The
/// first grid value wins exact ties.
inline TuneResult tune_tau(const Problem& p, const SubgradConfig& cfg) {
  if (cfg.tau_grid.empty()) throw ContractViolation("tune_tau: empty tau grid");
  SubgradConfig run_cfg = cfg;
  if (!run_cfg.lipschitz) run_cfg.lipschitz = estimate_lipschitz(p, cfg.estimate);
  TuneResult out;
  for (double tau : cfg.tau_grid) {
    run_cfg.tau = tau;
    TuneEntry e;
    e.tau = tau;
    e.record = run_subgradient(p, run_cfg);
    e.errors = extract_errors(e.record, cfg.feas_tol);
    out.entries.push_back(std::move(e));
  }
  std::vector<ErrorPair> errors;
  for (const auto& e : out.entries) errors.push_back(e.errors);
  out.best_index = lexicographic_best(errors);
  out.best_tau = out.entries[out.best_index].tau;
  return out;
}

}  // namespace stosqp
