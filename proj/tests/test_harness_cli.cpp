// Error extraction, performance profiles, box plots, record persistence,
// plan parsing and the experiment directory.

#include <stosqp/stosqp.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace stosqp;
namespace fs = std::filesystem;

namespace {

RunRecord synthetic(const std::vector<double>& c_inf) {
  RunRecord rec;
  for (std::size_t k = 0; k < c_inf.size(); ++k) {
    IterationRow r;
    r.k = static_cast<int>(k);
    r.c_inf = c_inf[k];
    r.stationarity = 100.0 + static_cast<double>(k);
    rec.rows.push_back(r);
  }
  return rec;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Scratch directory removed at scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("stosqp_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

nlohmann::json tiny_plan() {
  return nlohmann::json::parse(R"({
    "name": "tiny",
    "problems": ["lin-quad"],
    "solvers": [{"type": "stochastic", "max_iter": 30}],
    "noise": [1e-4],
    "seeds": [3]
  })");
}

nlohmann::json mixed_plan() {
  return nlohmann::json::parse(R"({
    "name": "mixed",
    "problems": ["lin-quad", "hs006"],
    "solvers": [
      {"type": "adaptive", "h_policy": "identity"},
      {"type": "linesearch", "label": "ls"},
      {"type": "stochastic", "max_iter": 40},
      {"type": "subgradient", "max_iter": 60, "tau_grid": [0.1, 1.0]}
    ],
    "noise": [1e-4, 1e-2],
    "seeds": 2
  })");
}

}  // namespace

TEST(ExtractErrors, NoFeasibleRowPicksFirstLeastInfeasible) {
  const auto e = extract_errors(synthetic({3, 2, 2}));
  EXPECT_EQ(e.at_iteration, 1);
  EXPECT_FALSE(e.was_feasible);
  EXPECT_EQ(e.feasibility_error, 2.0);
}

TEST(ExtractErrors, AllFeasiblePicksTheLastRow) {
  const auto e = extract_errors(synthetic({1e-9, 1e-8, 1e-10}));
  EXPECT_EQ(e.at_iteration, 2);
  EXPECT_TRUE(e.was_feasible);
}

TEST(ExtractErrors, EmptyRecordIsAContractViolation) {
  EXPECT_THROW(extract_errors(RunRecord{}), ContractViolation);
}

TEST(ExtractErrors, ToleranceScalesWithInitialViolation) {
  // threshold = 1e-6 * 100
  const auto e = extract_errors(synthetic({100, 5e-5, 1}));
  EXPECT_EQ(e.at_iteration, 1);
  EXPECT_TRUE(e.was_feasible);
}

TEST(ExtractErrors, AppendingWorseRowsKeepsTheSelection) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> c;
    const int len = 1 + t % 20;
    for (int k = 0; k < len; ++k) c.push_back(u(rng) < 0.3 ? 1e-9 * u(rng) : 0.5 + u(rng));
    const auto before = extract_errors(synthetic(c));
    const double worst = *std::max_element(c.begin(), c.end());
    auto extended = c;
    for (int k = 0; k < 5; ++k) extended.push_back(std::max(worst, 1.0) * (2.0 + k));
    const auto after = extract_errors(synthetic(extended));
    EXPECT_EQ(before.at_iteration, after.at_iteration) << "trial " << t;
    EXPECT_EQ(before.was_feasible, after.was_feasible);
  }
}

TEST(PerformanceProfile, SingleSolverIsOneEverywhere) {
  const auto prof = performance_profile({"a", "b", "c"}, {"s"}, {{3.0}, {10.0}, {1.0}}, 20.0);
  for (double r : prof.rho[0]) EXPECT_EQ(r, 1.0);
  EXPECT_EQ(prof.at(0, 1.0), 1.0);
}

TEST(PerformanceProfile, FailedRunNeverReachesOne) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto prof = performance_profile({"a", "b"}, {"s1", "s2"}, {{5.0, inf}, {5.0, 6.0}}, 20.0);
  EXPECT_LT(prof.at(1, 1e300), 1.0);
  EXPECT_EQ(prof.at(1, 1.2), 0.5);
}

TEST(PerformanceProfile, AllFailedProblemKeepsTheDenominator) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto prof = performance_profile({"a", "b"}, {"s1", "s2"}, {{inf, inf}, {2.0, 4.0}}, 20.0);
  EXPECT_EQ(prof.at(0, 20.0), 0.5);
  EXPECT_EQ(prof.at(1, 20.0), 0.5);
}

TEST(PerformanceProfile, RejectsNonPositiveMetrics) {
  EXPECT_THROW(performance_profile({"a"}, {"s"}, {{0.0}}, 20.0), ContractViolation);
  EXPECT_THROW(performance_profile({"a", "b"}, {"s"}, {{1.0}}, 20.0), ContractViolation);
}

TEST(PerformanceProfile, MonotoneBoundedAndExactAtOne) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> iters(1, 200);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double inf = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 50; ++t) {
    const std::size_t P = 15, S = 4;
    std::vector<std::string> inst, solv;
    for (std::size_t p = 0; p < P; ++p) inst.push_back("p" + std::to_string(p));
    for (std::size_t s = 0; s < S; ++s) solv.push_back("s" + std::to_string(s));
    std::vector<std::vector<double>> m(P, std::vector<double>(S));
    for (auto& row : m) {
      for (auto& v : row) v = u(rng) < 0.15 ? inf : iters(rng);
    }
    const auto prof = performance_profile(inst, solv, m, 20.0);
    EXPECT_EQ(prof.breakpoints.front(), 1.0);
    EXPECT_EQ(prof.breakpoints.back(), 20.0);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t i = 0; i < prof.rho[s].size(); ++i) {
        EXPECT_LE(prof.rho[s][i], 1.0);
        if (i) {
          EXPECT_GE(prof.rho[s][i], prof.rho[s][i - 1]);
        }
      }
      std::size_t wins = 0;
      for (const auto& row : m) {
        const double best = *std::min_element(row.begin(), row.end());
        wins += std::isfinite(best) && row[s] == best ? 1 : 0;
      }
      EXPECT_EQ(prof.rho[s][0], static_cast<double>(wins) / P);
    }
  }
}

TEST(Boxplot, IdenticalValues) {
  const auto b = boxplot_data({2.5, 2.5, 2.5, 2.5});
  for (double v : {b.min, b.q1, b.median, b.q3, b.max, b.whisker_lo, b.whisker_hi}) {
    EXPECT_EQ(v, 2.5);
  }
  EXPECT_TRUE(b.outliers.empty());
  EXPECT_THROW(boxplot_data({}), ContractViolation);
}

TEST(Quantile, InterpolatesBetweenOrderStatistics) {
  EXPECT_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_EQ(quantile({7}, 0.25), 7.0);
  EXPECT_EQ(quantile({1, 2}, 1.0), 2.0);
}

TEST(Record, JsonlRoundTripPreservesEveryField) {
  auto rec = run_stochastic(find_problem("hs007"), [] {
    StochConfig c;
    c.max_iter = 20;
    c.oracle = {1e-2, 4};
    return c;
  }());
  rec.rows[3].tau_trial = std::numeric_limits<double>::infinity();
  const std::string text = record_to_jsonl(rec);
  std::istringstream in(text);
  const auto back = record_from_jsonl(in);
  EXPECT_EQ(record_to_jsonl(back), text);
  EXPECT_TRUE(std::isinf(back.rows[3].tau_trial));
  EXPECT_EQ(back.status, rec.status);
  EXPECT_EQ(back.x_final, rec.x_final);
}

TEST(Record, UnsetFieldsRoundTripAsNan) {
  // The terminating row of a deterministic run has no step, so alpha is unset.
  const auto rec = run_adaptive(find_problem("lin-quad"));
  std::istringstream in(record_to_jsonl(rec));
  const auto back = record_from_jsonl(in);
  EXPECT_TRUE(std::isnan(back.rows.back().alpha));
  EXPECT_TRUE(std::isnan(back.rows.back().xi));
  EXPECT_EQ(back.rows.size(), rec.rows.size());
}

TEST(Record, MissingFooterIsRejected) {
  std::istringstream in(R"({"type":"header","run_id":"a","problem":"p","solver":"s","seed":0,"noise":0,"h_policy":"identity","config":{}})");
  EXPECT_THROW(record_from_jsonl(in), ContractViolation);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Fmt, RoundTripsDoubles) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(fmt(v)), v);
  EXPECT_EQ(fmt(std::nan("")), "");
  EXPECT_EQ(fmt(std::numeric_limits<double>::infinity()), "inf");
}

TEST(ParsePlan, Defaults) {
  const auto plan = parse_plan(nlohmann::json::parse(R"({"problems": "all", "solvers": [{"type": "adaptive"}]})"));
  EXPECT_EQ(plan.problems.size(), builtin_suite().size());
  EXPECT_EQ(plan.noise, std::vector<double>{0.0});
  EXPECT_EQ(plan.seeds, std::vector<std::uint64_t>{0});
  EXPECT_EQ(plan.solvers[0].label, "adaptive");
}

TEST(ParsePlan, SeedCountAndSubgradientTuning) {
  const auto plan = parse_plan(mixed_plan());
  EXPECT_EQ(plan.seeds, (std::vector<std::uint64_t>{0, 1}));
  EXPECT_TRUE(plan.solvers[3].tune);
  EXPECT_EQ(plan.solvers[1].label, "ls");
  EXPECT_EQ(plan.solvers[0].det.h_policy, HessianPolicy::identity);
}

TEST(ParsePlan, Errors) {
  const char* bad[] = {
      R"([])",
      R"({"solvers": [{"type": "adaptive"}]})",
      R"({"problems": ["nope"], "solvers": [{"type": "adaptive"}]})",
      R"({"problems": ["lin-quad"], "solvers": []})",
      R"({"problems": ["lin-quad"], "solvers": [{"type": "newton"}]})",
      R"({"problems": ["lin-quad"], "solvers": [{"type": "adaptive", "theta": 1}]})",
      R"({"problems": ["lin-quad"], "solvers": [{"type": "adaptive"}], "extra": 1})",
      R"({"problems": ["lin-quad"], "solvers": [{"type": "adaptive"}, {"type": "adaptive"}]})",
      R"({"problems": ["lin-quad"], "solvers": [{"type": "stochastic", "beta": 2}]})",
      R"({"problems": ["lin-quad"], "solvers": [{"type": "stochastic", "beta_schedule": "cosine"}]})",
      R"({"problems": ["lin-quad"], "solvers": [{"type": "subgradient", "tau": "best"}]})",
      R"({"problems": ["lin-quad"], "solvers": [{"type": "subgradient", "tau_grid": []}]})",
      R"({"problems": ["lin-quad"], "solvers": [{"type": "adaptive"}], "noise": [-1]})",
      R"({"problems": ["lin-quad"], "solvers": [{"type": "adaptive"}], "seeds": 0})",
      R"({"problems": ["lin-quad"], "solvers": [{"type": "adaptive", "max_iter": "many"}]})",
  };
  for (const char* text : bad) {
    EXPECT_THROW(parse_plan(nlohmann::json::parse(text)), PlanError) << text;
  }
  EXPECT_THROW(load_plan("/nonexistent/plan.json"), PlanError);
}

TEST(Experiment, SingletonPlanWritesOneRunAndAManifest) {
  TempDir dir("singleton");
  const auto res = run_experiment(parse_plan(tiny_plan()), dir.path.string());
  ASSERT_EQ(res.runs.size(), 1u);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir.path / "runs")) files += e.is_regular_file();
  EXPECT_EQ(files, 1u);
  EXPECT_TRUE(fs::exists(dir.path / "runs" / "lin-quad__stochastic__noise0.0001__seed3.jsonl"));
  const auto manifest = nlohmann::json::parse(slurp(dir.path / "manifest.json"));
  EXPECT_EQ(manifest.at("tool"), "stosqp");
  EXPECT_EQ(manifest.at("version"), kVersion);
  EXPECT_EQ(manifest.at("runs").size(), 1u);
  EXPECT_EQ(manifest.at("plan"), tiny_plan());
  for (const auto& out : manifest.at("outputs")) {
    EXPECT_TRUE(fs::exists(dir.path / out.get<std::string>())) << out;
  }
}

TEST(Experiment, CrossProductAndCsvHeaders) {
  TempDir dir("mixed");
  const auto res = run_experiment(parse_plan(mixed_plan()), dir.path.string());
  // 2 problems x (2 deterministic + 2 seeded x 2 noise x 2 seeds)
  EXPECT_EQ(res.runs.size(), 2u * (2 + 2 * 2 * 2));
  EXPECT_EQ(res.failures, 0u);
  const std::string errors = slurp(dir.path / "errors.csv");
  EXPECT_EQ(errors.substr(0, errors.find('\n')),
            "run_id,problem,solver,noise,seed,status,iterations,fevals,feasibility_error,"
            "optimality_error,at_iteration,was_feasible,tau");
  const std::string tuning = slurp(dir.path / "tuning.csv");
  EXPECT_EQ(std::count(tuning.begin(), tuning.end(), '\n'), 1 + 2 * 2 * 2 * 2);
  const std::string profile = slurp(dir.path / "profile_iters.csv");
  EXPECT_EQ(profile.substr(0, profile.find('\n')), "t,adaptive,ls,stochastic,subgradient");

  // the post-processing entry points agree with what the batch wrote
  const auto loaded = load_summaries(dir.path.string());
  EXPECT_EQ(loaded.size(), res.runs.size());
  const fs::path again = dir.path / "profile_again.csv";
  write_profile_csv(profile_from_runs(loaded, ProfileMetric::iterations, 20.0), again.string());
  EXPECT_EQ(slurp(again), profile);
}

TEST(Experiment, RerunFromManifestIsByteIdentical) {
  TempDir a("rerun_a"), b("rerun_b");
  run_experiment(parse_plan(mixed_plan()), a.path.string());
  run_experiment(load_plan((a.path / "manifest.json").string()), b.path.string());
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(a.path / "runs")) {
    EXPECT_EQ(slurp(e.path()), slurp(b.path / "runs" / e.path().filename())) << e.path();
    ++compared;
  }
  EXPECT_GT(compared, 0u);
  for (const char* f : {"errors.csv", "profile_iters.csv", "profile_fevals.csv", "boxplot.csv",
                        "tuning.csv", "manifest.json"}) {
    EXPECT_EQ(slurp(a.path / f), slurp(b.path / f)) << f;
  }
}

TEST(Experiment, FailingRunIsRecordedAndTheBatchContinues) {
  // max_iter 0 makes the record empty, which summarize must tolerate.
  auto plan = parse_plan(nlohmann::json::parse(R"({
    "problems": ["lin-quad"],
    "solvers": [{"type": "stochastic", "max_iter": 0}, {"type": "adaptive"}]
  })"));
  TempDir dir("failing");
  const auto res = run_experiment(plan, dir.path.string());
  ASSERT_EQ(res.runs.size(), 2u);
  EXPECT_EQ(res.runs[1].status, Status::success);
}
