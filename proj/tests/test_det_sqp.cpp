// Deterministic SQP: adaptive Lipschitz stepsizes and backtracking line search.

#include <stosqp/stosqp.hpp>

#include "support/invariants.hpp"

#include <gtest/gtest.h>

using namespace stosqp;
using stosqp::testing::InvariantChecker;

namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

using Runner = RunRecord (*)(const Problem&, const DetConfig&, const RunOptions&);

struct Variant {
  const char* name;
  Runner run;
  HessianPolicy policy;
};

const Variant kVariants[] = {
    {"adaptive/identity", &run_adaptive, HessianPolicy::identity},
    {"adaptive/lagrangian", &run_adaptive, HessianPolicy::lagrangian},
    {"linesearch/identity", &run_linesearch, HessianPolicy::identity},
    {"linesearch/lagrangian", &run_linesearch, HessianPolicy::lagrangian},
};

/// min x1 + 2 x2 + x3 s.t. x1 - x3 = 0 (linear objective and constraint).
Problem linear_problem() {
  Problem p;
  p.name = "linear";
  p.n = 3;
  p.m = 1;
  p.objective = [](const Vector& x) { return x[0] + 2.0 * x[1] + x[2]; };
  p.gradient = [](const Vector&) { return (Vector(3) << 1, 2, 1).finished(); };
  p.constraints = [](const Vector& x) { return Vector::Constant(1, x[0] - x[2]); };
  p.jacobian = [](const Vector&) { return (Matrix(1, 3) << 1, 0, -1).finished(); };
  p.x0 = Vector::Zero(3);
  return p;
}

}  // namespace

TEST(StepsizeCandidates, ZeroConstraintViolation) {
  const auto c = stepsize_candidates(3.0, 0.5, 2.0, 1.5, 0.0, 2.0, 1e-4);
  EXPECT_EQ(c.alpha_tilde, c.alpha_hat);
}

TEST(SelectStepsize, UnitBoundary) {
  const auto s = select_stepsize(1.0, 1.0);
  EXPECT_EQ(s.alpha, 1.0);
  EXPECT_EQ(s.branch, Branch::unit);
}

TEST(LipschitzValid, LinearFunctionsNeverViolate) {
  const Problem p = linear_problem();
  const auto e = evaluate(p, p.x0);
  const Vector d = (Vector(3) << 0.3, -1.0, 2.0).finished();
  for (double L : {1e-8, 1.0, 100.0}) {
    for (double alpha : {0.1, 1.0, 7.0}) {
      const auto chk = lipschitz_valid(p, p.x0, d, alpha, e.f, e.g, e.c, e.J, L,
                                       Vector::Constant(1, 1e-8));
      EXPECT_TRUE(chk.ok);
      EXPECT_FALSE(chk.violated_f);
      EXPECT_TRUE(chk.violated_c.empty());
    }
  }
}

TEST(LipschitzCheck, NonFiniteTrialValuesAreViolations) {
  const auto chk = lipschitz_check(std::nan(""), Vector::Constant(1, INFINITY), 0.0, 0.0,
                                   Vector::Zero(1), Vector::Zero(1), 1.0, 1.0, 1.0,
                                   Vector::Ones(1));
  EXPECT_FALSE(chk.ok);
  EXPECT_TRUE(chk.violated_f);
  EXPECT_EQ(chk.violated_c, std::vector<int>{0});
}

TEST(DetSqp, StationaryStartReturnsAtIterationZero) {
  Problem p = find_problem("lin-quad");
  p.x0 = v2(1, 1);
  for (const auto& v : kVariants) {
    DetConfig cfg;
    cfg.h_policy = v.policy;
    const auto rec = v.run(p, cfg, {});
    EXPECT_EQ(rec.status, Status::success) << v.name;
    ASSERT_EQ(rec.rows.size(), 1u) << v.name;
    EXPECT_EQ(rec.iterations(), 0) << v.name;
  }
}

TEST(DetSqp, SolvesTheSuiteUnderEveryVariant) {
  for (const auto& p : builtin_suite()) {
    for (const auto& v : kVariants) {
      DetConfig cfg;
      cfg.h_policy = v.policy;
      const auto rec = v.run(p, cfg, {});
      EXPECT_EQ(rec.status, Status::success) << p.name << " " << v.name << ": " << rec.message;
      EXPECT_LE(rec.iterations(), 10000);
      if (p.known_solution) {
        EXPECT_LE(norm_inf(rec.x_final - *p.known_solution), 1e-5) << p.name << " " << v.name;
      }
      // rows are contiguous in k
      for (std::size_t i = 0; i < rec.rows.size(); ++i) {
        ASSERT_EQ(rec.rows[i].k, static_cast<int>(i));
      }
    }
  }
}

TEST(DetSqp, InvariantsHoldOnEveryIteration) {
  for (const auto& p : builtin_suite()) {
    for (const auto& v : kVariants) {
      DetConfig cfg;
      cfg.h_policy = v.policy;
      InvariantChecker chk({}, p.name + " " + v.name);
      RunOptions opts;
      opts.observer = chk.observer();
      v.run(p, cfg, opts);
      EXPECT_TRUE(chk.ok()) << chk.summary() << "\n"
                            << (chk.messages().empty() ? "" : chk.messages().front());
    }
  }
}

TEST(DetSqp, AcceptedStepsizesArePositiveAndTauSettles) {
  for (const auto& p : builtin_suite()) {
    for (const auto& v : kVariants) {
      DetConfig cfg;
      cfg.h_policy = v.policy;
      const auto rec = v.run(p, cfg, {});
      ASSERT_EQ(rec.status, Status::success);
      std::vector<double> taus;
      for (const auto& r : rec.rows) {
        if (std::isnan(r.alpha)) continue;
        EXPECT_GT(r.alpha, 0.0) << p.name << " " << v.name << " k=" << r.k;
        taus.push_back(r.tau);
      }
      // Settling is a long-run property; short runs may still be adjusting tau.
      if (taus.size() < 40) continue;
      const std::size_t half = taus.size() / 2;
      for (std::size_t i = half; i < taus.size(); ++i) {
        EXPECT_EQ(taus[i], taus[half]) << p.name << " " << v.name;
      }
    }
  }
}

TEST(DetSqp, LipschitzEstimatesStayBelowTheCap) {
  // Largest curvature of f over the plane: 1, 6 and 4; the constraints are linear.
  const std::pair<const char*, double> cases[] = {{"lin-quad", 1.0}, {"hs028", 6.0}, {"hs048", 4.0}};
  for (const auto& [name, L_true] : cases) {
    for (auto policy : {HessianPolicy::identity, HessianPolicy::lagrangian}) {
      DetConfig cfg;
      cfg.h_policy = policy;
      const double cap = std::max(cfg.L_init, cfg.rho * L_true) + 1e-12;
      double worst = 0.0;
      RunOptions opts;
      opts.observer = [&](const IterationDetail& d) { worst = std::max(worst, d.lipschitz); };
      const auto rec = run_adaptive(find_problem(name), cfg, opts);
      ASSERT_EQ(rec.status, Status::success);
      EXPECT_LE(worst, cap) << name;
    }
  }
}

TEST(DetSqp, AdaptiveCoversAllThreeBranches) {
  std::map<Branch, int> seen;
  for (const auto& p : builtin_suite()) {
    for (auto policy : {HessianPolicy::identity, HessianPolicy::lagrangian}) {
      DetConfig cfg;
      cfg.h_policy = policy;
      for (const auto& r : run_adaptive(p, cfg).rows) {
        if (!std::isnan(r.alpha)) ++seen[r.branch];
      }
    }
  }
  EXPECT_GT(seen[Branch::below_one], 0);
  EXPECT_GT(seen[Branch::unit], 0);
  EXPECT_GT(seen[Branch::above_one], 0);
}

TEST(DetSqp, IterationLimit) {
  DetConfig cfg;
  cfg.max_iter = 2;
  cfg.h_policy = HessianPolicy::identity;
  const auto rec = run_adaptive(find_problem("circle-rosen"), cfg);
  EXPECT_EQ(rec.status, Status::iteration_limit);
  EXPECT_EQ(rec.iterations(), 2);
}

TEST(DetSqp, LinesearchFailureWhenTheCapIsTooSmall) {
  DetConfig cfg;
  cfg.backtrack_cap = 0;
  cfg.h_policy = HessianPolicy::identity;
  const auto rec = run_linesearch(find_problem("circle-rosen"), cfg);
  EXPECT_EQ(rec.status, Status::linesearch_failure);
}

TEST(DetSqp, LicqFailureAtTheStart) {
  Problem p = find_problem("lin-quad");
  p.constraints = [](const Vector& x) { return Vector::Constant(1, x.squaredNorm() - 1.0); };
  p.jacobian = [](const Vector& x) { return Matrix((2.0 * x).transpose()); };
  p.lagrangian_hessian = nullptr;
  for (const auto& v : kVariants) {
    const auto rec = v.run(p, DetConfig{}, {});
    EXPECT_EQ(rec.status, Status::licq_failure) << v.name;
  }
}

TEST(DetSqp, NonFiniteInitialValueIsNumericalFailure) {
  Problem p = find_problem("lin-quad");
  p.objective = [](const Vector&) { return std::nan(""); };
  EXPECT_EQ(run_adaptive(p).status, Status::numerical_failure);
  EXPECT_EQ(run_linesearch(p).status, Status::numerical_failure);
}

TEST(DetSqp, NonFiniteTrialPointsAreRejected) {
  // f is NaN on the band 0.3 < x1 < 0.5, which the first adaptive trial
  // point from (-3, 2.5) lands in. Both searches must back off and still reach (1, 1).
  Problem p = find_problem("lin-quad");
  p.objective = [](const Vector& x) {
    return x[0] > 0.3 && x[0] < 0.5 ? std::nan("") : 0.5 * x.squaredNorm();
  };
  p.x0 = v2(-3.0, 2.5);
  for (const auto& v : kVariants) {
    DetConfig cfg;
    cfg.h_policy = v.policy;
    const auto rec = v.run(p, cfg, {});
    EXPECT_EQ(rec.status, Status::success) << v.name;
    EXPECT_LE(norm_inf(rec.x_final - v2(1, 1)), 1e-6) << v.name;
    ASSERT_FALSE(rec.rows.empty());
    if (std::string(v.name).rfind("adaptive", 0) == 0) {
      EXPECT_GE(rec.rows.front().trials, 2) << v.name;
    }
  }
}

TEST(DetSqp, FevalsCountEveryObjectiveEvaluation) {
  const auto rec = run_linesearch(find_problem("circle-rosen"), DetConfig{});
  std::int64_t trials = 1;
  for (const auto& r : rec.rows) trials += r.trials;
  EXPECT_EQ(rec.fevals, trials);
}

TEST(DetConfig, RejectsOutOfRangeParameters) {
  DetConfig cfg;
  cfg.rho = 1.0;
  EXPECT_THROW(cfg.validate(), ContractViolation);
  cfg = {};
  cfg.sigma = 1.0;
  EXPECT_THROW(cfg.validate(), ContractViolation);
  cfg = {};
  cfg.shrink_factor = 0.0;
  EXPECT_THROW(run_adaptive(find_problem("lin-quad"), cfg), ContractViolation);
}
