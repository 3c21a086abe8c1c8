// Command-line front end: single solves, batch experiments, and post-processing
// of experiment directories.

#include <stosqp/stosqp.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

using namespace stosqp;

constexpr int kExitPlanError = 2;
constexpr int kExitRunError = 3;

struct SolveArgs {
  std::string problem;
  std::string solver = "adaptive";
  std::uint64_t seed = 0;
  double noise = 0.0;
  std::string h_policy;
  int max_iter = -1;
  double tau = 0.0;
  std::string out = "out";
};

int cmd_solve(const SolveArgs& a) {
  const Problem p = find_problem(a.problem);
  const SolverKind kind = solver_kind_from_string(a.solver);
  RunRecord rec;
  switch (kind) {
    case SolverKind::adaptive:
    case SolverKind::linesearch: {
      DetConfig cfg;
      if (!a.h_policy.empty()) cfg.h_policy = hessian_policy_from_string(a.h_policy);
      if (a.max_iter >= 0) cfg.max_iter = a.max_iter;
      rec = kind == SolverKind::adaptive ? run_adaptive(p, cfg) : run_linesearch(p, cfg);
      break;
    }
    case SolverKind::stochastic: {
      StochConfig cfg;
      if (!a.h_policy.empty()) cfg.h_policy = hessian_policy_from_string(a.h_policy);
      if (a.max_iter >= 0) cfg.max_iter = a.max_iter;
      cfg.oracle = {a.noise, a.seed};
      rec = run_stochastic(p, cfg);
      break;
    }
    case SolverKind::subgradient: {
      SubgradConfig cfg;
      if (a.max_iter >= 0) cfg.max_iter = a.max_iter;
      cfg.oracle = {a.noise, a.seed};
      if (a.tau > 0.0) {
        cfg.tau = a.tau;
        rec = run_subgradient(p, cfg);
      } else {
        auto tuned = tune_tau(p, cfg);
        rec = std::move(tuned.entries[tuned.best_index].record);
        rec.config["tuned"] = true;
        rec.config["tau_grid"] = cfg.tau_grid;
      }
      break;
    }
  }
  std::filesystem::create_directories(a.out);
  const std::string path = (std::filesystem::path(a.out) / (rec.run_id + ".jsonl")).string();
  write_record(rec, path);
  const auto e = extract_errors(rec);
  std::cout << "problem      " << rec.problem << '\n'
            << "solver       " << rec.solver << '\n'
            << "status       " << to_string(rec.status) << '\n'
            << "iterations   " << rec.iterations() << '\n'
            << "fevals       " << rec.fevals << '\n'
            << "feasibility  " << fmt(e.feasibility_error) << " (k=" << e.at_iteration << ")\n"
            << "optimality   " << fmt(e.optimality_error) << '\n'
            << "log          " << path << '\n';
  return rec.status == Status::success || rec.status == Status::budget_exhausted ? 0 : 1;
}

int cmd_tune(const std::string& problem, double noise, std::uint64_t seed, int max_iter) {
  SubgradConfig cfg;
  cfg.oracle = {noise, seed};
  if (max_iter >= 0) cfg.max_iter = max_iter;
  const auto tuned = tune_tau(find_problem(problem), cfg);
  std::cout << "tau,feasibility_error,optimality_error,selected\n";
  for (std::size_t i = 0; i < tuned.entries.size(); ++i) {
    const auto& e = tuned.entries[i];
    std::cout << fmt(e.tau) << ',' << fmt(e.errors.feasibility_error) << ','
              << fmt(e.errors.optimality_error) << ',' << (i == tuned.best_index ? "true" : "false")
              << '\n';
  }
  std::cout << "best_tau " << fmt(tuned.best_tau) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic and deterministic SQP for equality-constrained optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", stosqp::kVersion);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve one built-in problem with one solver");
  s->add_option("--problem", solve.problem, "Problem name (see `list`)")->required();
  s->add_option("--solver", solve.solver, "Solver")
      ->check(CLI::IsMember({"adaptive", "linesearch", "stochastic", "subgradient"}));
  s->add_option("--seed", solve.seed, "Oracle seed");
  s->add_option("--noise", solve.noise, "Per-coordinate gradient noise variance")
      ->check(CLI::NonNegativeNumber);
  s->add_option("--h-policy", solve.h_policy, "Hessian policy")
      ->check(CLI::IsMember({"identity", "lagrangian"}));
  s->add_option("--max-iter", solve.max_iter, "Iteration limit or budget");
  s->add_option("--tau", solve.tau, "Subgradient penalty parameter (tuned over the grid if omitted)");
  s->add_option("--out", solve.out, "Output directory for the JSONL log");

  std::string plan_file, plan_out;
  bool quiet = false;
  auto* e = app.add_subcommand("experiment", "Run a batch experiment from a JSON plan");
  e->add_option("--plan", plan_file, "Plan file (or a manifest from a previous run)")->required();
  e->add_option("--out", plan_out, "Output directory (default: results/<plan name>)");
  e->add_flag("--quiet", quiet, "Do not print one line per run");

  std::string in_dir, out_file, metric = "iters";
  double cap = 20.0, feas_tol = 1e-6;
  auto* pr = app.add_subcommand("profile", "Performance profile data from an experiment directory");
  pr->add_option("--in", in_dir, "Experiment directory")->required();
  pr->add_option("--metric", metric, "Metric")->check(CLI::IsMember({"iters", "fevals"}));
  pr->add_option("--cap", cap, "Largest ratio t")->check(CLI::Range(1.0, 1e12));
  pr->add_option("--out", out_file, "Output CSV")->required();

  std::string box_in, box_out;
  auto* bx = app.add_subcommand("boxplot", "Box-plot summaries of extracted errors");
  bx->add_option("--in", box_in, "Experiment directory")->required();
  bx->add_option("--out", box_out, "Output CSV")->required();
  bx->add_option("--feas-tol", feas_tol, "Relative feasibility tolerance for error extraction");

  std::string tune_problem;
  double tune_noise = 0.0;
  std::uint64_t tune_seed = 0;
  int tune_iter = -1;
  auto* t = app.add_subcommand("tune-tau", "Tune the subgradient penalty parameter on one instance");
  t->add_option("--problem", tune_problem, "Problem name")->required();
  t->add_option("--noise", tune_noise, "Gradient noise variance")->check(CLI::NonNegativeNumber);
  t->add_option("--seed", tune_seed, "Oracle seed");
  t->add_option("--max-iter", tune_iter, "Budget per grid value");

  app.add_subcommand("list", "List the built-in problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; bad usage shares the plan-error code.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*s) return cmd_solve(solve);
    if (*e) {
      ExperimentPlan plan;
      try {
        plan = load_plan(plan_file);
      } catch (const PlanError& err) {
        std::cerr << "plan error: " << err.what() << '\n';
        return kExitPlanError;
      }
      if (plan_out.empty()) plan_out = "results/" + plan.name;
      const auto res = run_experiment(plan, plan_out, quiet ? nullptr : &std::cout);
      std::cout << res.runs.size() << " runs written to " << plan_out << " (" << res.failures
                << " raised errors)\n";
      return 0;
    }
    if (*pr) {
      const auto runs = load_summaries(in_dir, feas_tol);
      write_profile_csv(profile_from_runs(runs, profile_metric_from_string(metric), cap), out_file);
      return 0;
    }
    if (*bx) {
      write_boxplot_csv(boxplots_from_runs(load_summaries(box_in, feas_tol)), box_out);
      return 0;
    }
    if (*t) return cmd_tune(tune_problem, tune_noise, tune_seed, tune_iter);
    for (const auto& p : builtin_suite()) {
      std::cout << p.name << "  n=" << p.n << " m=" << p.m << '\n';
    }
    return 0;
  } catch (const ContractViolation& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitPlanError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitRunError;
  }
}
