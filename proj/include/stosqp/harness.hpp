#pragma once

// Batch experiments: plan parsing, the run cross product, and the artifact
// directory (per-run JSONL logs, CSV summaries, manifest).

#include <stosqp/det_sqp.hpp>
#include <stosqp/metrics.hpp>
#include <stosqp/stoch_sqp.hpp>
#include <stosqp/subgradient.hpp>
#include <stosqp/suite.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace stosqp {

inline constexpr const char* kVersion = "0.1.0";

/// Malformed or inconsistent experiment plan.
class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolverKind { adaptive, linesearch, stochastic, subgradient };

inline std::string_view to_string(SolverKind k) {
  switch (k) {
    case SolverKind::adaptive: return "adaptive";
    case SolverKind::linesearch: return "linesearch";
    case SolverKind::stochastic: return "stochastic";
    case SolverKind::subgradient: return "subgradient";
  }
  return "?";
}

inline SolverKind solver_kind_from_string(std::string_view s) {
  for (auto k : {SolverKind::adaptive, SolverKind::linesearch, SolverKind::stochastic,
                 SolverKind::subgradient}) {
    if (s == to_string(k)) return k;
  }
  throw PlanError("unknown solver '" + std::string(s) + "'");
}

inline bool is_seeded(SolverKind k) {
  return k == SolverKind::stochastic || k == SolverKind::subgradient;
}

struct SolverSpec {
  std::string label;
  SolverKind kind = SolverKind::adaptive;
  DetConfig det;
  StochConfig stoch;
  SubgradConfig subgrad;
  /// Subgradient only: pick tau per instance from subgrad.tau_grid.
  bool tune = false;
};

struct ExperimentPlan {
  std::string name = "experiment";
  std::vector<std::string> problems;
  std::vector<SolverSpec> solvers;
  std::vector<double> noise{0.0};
  std::vector<std::uint64_t> seeds{0};
  double feas_tol = 1e-6;
  double profile_cap = 20.0;
  /// The plan as read, kept verbatim for the manifest.
  nlohmann::json source;
};

namespace harness_detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& into) {
  if (j.contains(key)) {
    try {
      into = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw PlanError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                           const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw PlanError("unknown key '" + key + "' in " + where);
  }
}

inline SolverSpec parse_solver(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type")) throw PlanError("solver entries need a 'type'");
  SolverSpec s;
  s.kind = solver_kind_from_string(j.at("type").get<std::string>());
  s.label = std::string(to_string(s.kind));
  read_opt(j, "label", s.label);
  std::string policy;
  read_opt(j, "h_policy", policy);
  try {
    switch (s.kind) {
      case SolverKind::adaptive:
      case SolverKind::linesearch:
        reject_unknown(j, {"type", "label", "h_policy", "max_iter", "stat_tol", "feas_tol"},
                       "solver " + s.label);
        if (!policy.empty()) s.det.h_policy = hessian_policy_from_string(policy);
        read_opt(j, "max_iter", s.det.max_iter);
        read_opt(j, "stat_tol", s.det.stat_tol);
        read_opt(j, "feas_tol", s.det.feas_tol);
        s.det.validate();
        break;
      case SolverKind::stochastic: {
        reject_unknown(j, {"type", "label", "h_policy", "max_iter", "theta", "beta",
                           "beta_schedule", "beta_exponent", "xi_init", "tau_init"},
                       "solver " + s.label);
        if (!policy.empty()) s.stoch.h_policy = hessian_policy_from_string(policy);
        read_opt(j, "max_iter", s.stoch.max_iter);
        read_opt(j, "theta", s.stoch.theta);
        read_opt(j, "beta", s.stoch.beta);
        read_opt(j, "beta_exponent", s.stoch.beta_exponent);
        read_opt(j, "xi_init", s.stoch.xi_init);
        read_opt(j, "tau_init", s.stoch.tau_init);
        std::string sched = "constant";
        read_opt(j, "beta_schedule", sched);
        if (sched == "diminishing") {
          s.stoch.schedule = BetaSchedule::diminishing;
        } else if (sched != "constant") {
          throw PlanError("beta_schedule must be 'constant' or 'diminishing'");
        }
        s.stoch.validate();
        break;
      }
      case SolverKind::subgradient:
        reject_unknown(j, {"type", "label", "max_iter", "tau", "tau_grid"}, "solver " + s.label);
        read_opt(j, "max_iter", s.subgrad.max_iter);
        read_opt(j, "tau_grid", s.subgrad.tau_grid);
        if (j.contains("tau") && j.at("tau").is_string()) {
          if (j.at("tau").get<std::string>() != "tune") {
            throw PlanError("subgradient tau must be a number or \"tune\"");
          }
          s.tune = true;
        } else if (j.contains("tau")) {
          read_opt(j, "tau", s.subgrad.tau);
        } else {
          s.tune = true;
        }
        if (s.tune && s.subgrad.tau_grid.empty()) throw PlanError("tau_grid is empty");
        s.subgrad.validate();
        break;
    }
  } catch (const ContractViolation& e) {
    throw PlanError(e.what());
  }
  return s;
}

}  // namespace harness_detail

/// Accepts either a plan or a manifest (whose "plan" member is the plan).
inline ExperimentPlan parse_plan(const nlohmann::json& input) {
  using harness_detail::read_opt;
  const nlohmann::json& j = input.contains("plan") ? input.at("plan") : input;
  if (!j.is_object()) throw PlanError("plan must be a JSON object");
  harness_detail::reject_unknown(
      j, {"name", "problems", "solvers", "noise", "seeds", "feas_tol", "profile_cap"}, "plan");
  ExperimentPlan plan;
  plan.source = j;
  read_opt(j, "name", plan.name);
  read_opt(j, "feas_tol", plan.feas_tol);
  read_opt(j, "profile_cap", plan.profile_cap);

  if (!j.contains("problems")) throw PlanError("plan needs 'problems'");
  if (j.at("problems").is_string() && j.at("problems").get<std::string>() == "all") {
    for (const auto& p : builtin_suite()) plan.problems.push_back(p.name);
  } else {
    read_opt(j, "problems", plan.problems);
  }
  if (plan.problems.empty()) throw PlanError("plan lists no problems");
  for (const auto& name : plan.problems) {
    try {
      find_problem(name);
    } catch (const ContractViolation& e) {
      throw PlanError(e.what());
    }
  }

  if (!j.contains("solvers") || !j.at("solvers").is_array() || j.at("solvers").empty()) {
    throw PlanError("plan needs a nonempty 'solvers' array");
  }
  std::set<std::string> labels;
  for (const auto& s : j.at("solvers")) {
    plan.solvers.push_back(harness_detail::parse_solver(s));
    if (!labels.insert(plan.solvers.back().label).second) {
      throw PlanError("duplicate solver label '" + plan.solvers.back().label + "'");
    }
  }

  read_opt(j, "noise", plan.noise);
  if (plan.noise.empty()) throw PlanError("plan lists no noise levels");
  for (double v : plan.noise) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw PlanError("noise levels must be finite and >= 0");
  }
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    if (s.is_number_integer()) {
      const auto count = s.get<std::int64_t>();
      if (count <= 0) throw PlanError("seed count must be positive");
      plan.seeds.clear();
      for (std::int64_t i = 0; i < count; ++i) plan.seeds.push_back(static_cast<std::uint64_t>(i));
    } else {
      read_opt(j, "seeds", plan.seeds);
    }
  }
  if (plan.seeds.empty()) throw PlanError("plan lists no seeds");
  if (!(plan.feas_tol > 0.0) || !(plan.profile_cap >= 1.0)) {
    throw PlanError("feas_tol must be positive and profile_cap at least 1");
  }
  return plan;
}

inline ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PlanError("cannot open plan file " + path);
  try {
    return parse_plan(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw PlanError(std::string("plan is not valid JSON: ") + e.what());
  }
}

/// 64-bit FNV-1a, used to fingerprint configurations.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

/// One line of errors.csv.
struct RunSummary {
  std::string run_id;
  std::string problem;
  std::string solver;
  double noise = 0.0;
  std::uint64_t seed = 0;
  Status status = Status::success;
  int iterations = 0;
  std::int64_t fevals = 0;
  ErrorPair errors;
  double tau = IterationRow::none;  // subgradient only
  double wall_time_s = 0.0;
};

inline RunSummary summarize(const RunRecord& rec, double feas_tol) {
  RunSummary s;
  s.run_id = rec.run_id;
  s.problem = rec.problem;
  s.solver = rec.solver;
  s.noise = rec.noise;
  s.seed = rec.seed;
  s.status = rec.status;
  s.iterations = rec.iterations();
  s.fevals = rec.fevals;
  if (!rec.rows.empty()) {
    s.errors = extract_errors(rec, feas_tol);
  } else {
    s.errors = {IterationRow::none, IterationRow::none, 0, false};
  }
  const std::string algorithm =
      rec.config.is_object() ? rec.config.value("algorithm", rec.solver) : rec.solver;
  if (algorithm == "subgradient" && rec.config.contains("tau")) {
    s.tau = rec.config.at("tau").get<double>();
  }
  s.wall_time_s = rec.wall_time_s;
  return s;
}

/// Formats a double so that it reads back to the same value.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_errors_csv(const std::vector<RunSummary>& runs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "run_id,problem,solver,noise,seed,status,iterations,fevals,feasibility_error,"
         "optimality_error,at_iteration,was_feasible,tau\n";
  for (const auto& r : runs) {
    out << r.run_id << ',' << r.problem << ',' << r.solver << ',' << fmt(r.noise) << ','
        << r.seed << ',' << to_string(r.status) << ',' << r.iterations << ',' << r.fevals << ','
        << fmt(r.errors.feasibility_error) << ',' << fmt(r.errors.optimality_error) << ','
        << r.errors.at_iteration << ',' << (r.errors.was_feasible ? "true" : "false") << ','
        << fmt(r.tau) << '\n';
  }
}

inline void write_timings_csv(const std::vector<RunSummary>& runs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "run_id,wall_time_s\n";
  for (const auto& r : runs) out << r.run_id << ',' << fmt(r.wall_time_s) << '\n';
}

enum class ProfileMetric { iterations, fevals };

inline ProfileMetric profile_metric_from_string(std::string_view s) {
  if (s == "iters") return ProfileMetric::iterations;
  if (s == "fevals") return ProfileMetric::fevals;
  throw ContractViolation("metric must be 'iters' or 'fevals'");
}

/// Instances are (problem, noise, seed); a run counts as solved only with
/// status "success". Counts below one are raised to one so that ratios exist.
inline PerformanceProfile profile_from_runs(const std::vector<RunSummary>& runs,
                                            ProfileMetric metric, double cap) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::string> solvers;
  std::map<std::string, std::map<std::string, double>> table;
  for (const auto& r : runs) {
    if (std::find(solvers.begin(), solvers.end(), r.solver) == solvers.end()) {
      solvers.push_back(r.solver);
    }
    const std::string inst = r.problem + "|" + fmt(r.noise) + "|" + std::to_string(r.seed);
    double v = inf;
    if (r.status == Status::success) {
      v = metric == ProfileMetric::iterations ? r.iterations : static_cast<double>(r.fevals);
      v = std::max(v, 1.0);
    }
    table[inst][r.solver] = v;
  }
  std::vector<std::string> instances;
  std::vector<std::vector<double>> values;
  for (const auto& [inst, row] : table) {
    instances.push_back(inst);
    std::vector<double> vals;
    for (const auto& s : solvers) {
      const auto it = row.find(s);
      vals.push_back(it == row.end() ? inf : it->second);
    }
    values.push_back(std::move(vals));
  }
  return performance_profile(instances, solvers, values, cap);
}

inline void write_profile_csv(const PerformanceProfile& prof, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << 't';
  for (const auto& s : prof.solvers) out << ',' << s;
  out << '\n';
  for (std::size_t t = 0; t < prof.breakpoints.size(); ++t) {
    out << fmt(prof.breakpoints[t]);
    for (std::size_t s = 0; s < prof.solvers.size(); ++s) out << ',' << fmt(prof.rho[s][t]);
    out << '\n';
  }
}

struct BoxGroup {
  std::string solver;
  double noise = 0.0;
  std::string metric;  // "feasibility" or "optimality"
  BoxSummary box;
};

/// Groups by solver and noise level, in order of first appearance.
inline std::vector<BoxGroup> boxplots_from_runs(const std::vector<RunSummary>& runs) {
  std::vector<std::pair<std::string, double>> keys;
  std::map<std::pair<std::string, double>, std::pair<std::vector<double>, std::vector<double>>>
      groups;
  for (const auto& r : runs) {
    const auto key = std::make_pair(r.solver, r.noise);
    if (!groups.count(key)) keys.push_back(key);
    auto& g = groups[key];
    if (!std::isnan(r.errors.feasibility_error)) g.first.push_back(r.errors.feasibility_error);
    if (!std::isnan(r.errors.optimality_error)) g.second.push_back(r.errors.optimality_error);
  }
  std::vector<BoxGroup> out;
  for (const auto& key : keys) {
    const auto& g = groups[key];
    if (!g.first.empty()) out.push_back({key.first, key.second, "feasibility", boxplot_data(g.first)});
    if (!g.second.empty()) out.push_back({key.first, key.second, "optimality", boxplot_data(g.second)});
  }
  return out;
}

inline void write_boxplot_csv(const std::vector<BoxGroup>& groups, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "solver,noise,metric,count,min,q1,median,q3,max,whisker_lo,whisker_hi,outliers\n";
  for (const auto& g : groups) {
    const auto& b = g.box;
    out << g.solver << ',' << fmt(g.noise) << ',' << g.metric << ',' << b.count << ','
        << fmt(b.min) << ',' << fmt(b.q1) << ',' << fmt(b.median) << ',' << fmt(b.q3) << ','
        << fmt(b.max) << ',' << fmt(b.whisker_lo) << ',' << fmt(b.whisker_hi) << ',';
    for (std::size_t i = 0; i < b.outliers.size(); ++i) {
      out << (i ? ";" : "") << fmt(b.outliers[i]);
    }
    out << '\n';
  }
}

/// Runs every JSONL log under dir (or dir/runs) in file-name order.
inline std::vector<RunSummary> load_summaries(const std::string& dir, double feas_tol = 1e-6) {
  namespace fs = std::filesystem;
  fs::path root(dir);
  if (fs::is_directory(root / "runs")) root /= "runs";
  if (!fs::is_directory(root)) throw std::runtime_error("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunSummary> out;
  for (const auto& f : files) out.push_back(summarize(read_record(f.string()), feas_tol));
  return out;
}

struct ExperimentResult {
  std::vector<RunSummary> runs;
  std::string directory;
  std::size_t failures = 0;  // runs that threw
};

namespace harness_detail {

inline std::string run_id(const std::string& problem, const SolverSpec& s, double noise,
                          std::uint64_t seed) {
  std::string id = problem + "__" + s.label;
  if (is_seeded(s.kind)) id += "__noise" + fmt(noise) + "__seed" + std::to_string(seed);
  return id;
}

inline RunRecord failed_record(const std::string& problem, const SolverSpec& s, double noise,
                               std::uint64_t seed, const std::string& what) {
  RunRecord rec;
  rec.problem = problem;
  rec.solver = s.label;
  rec.noise = noise;
  rec.seed = seed;
  rec.status = Status::numerical_failure;
  rec.message = what;
  return rec;
}

}  // namespace harness_detail

/// Executes problems x solvers x noise x seeds (noise and seeds only for the
/// stochastic solvers) and writes the artifact directory. A run that throws
/// is logged with status numerical_failure and the batch continues.
inline ExperimentResult run_experiment(const ExperimentPlan& plan, const std::string& out_dir,
                                       std::ostream* progress = nullptr) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "runs");
  ExperimentResult result;
  result.directory = out_dir;
  nlohmann::ordered_json manifest_runs = nlohmann::ordered_json::array();
  struct TuningLine {
    std::string run_id;
    double tau;
    ErrorPair errors;
    bool selected;
  };
  std::vector<TuningLine> tuning;

  auto persist = [&](RunRecord rec, const std::string& id) {
    rec.run_id = id;
    const std::string file = "runs/" + id + ".jsonl";
    write_record(rec, (fs::path(out_dir) / file).string());
    auto summary = summarize(rec, plan.feas_tol);
    nlohmann::ordered_json entry;
    entry["run_id"] = id;
    entry["file"] = file;
    entry["status"] = std::string(to_string(rec.status));
    manifest_runs.push_back(entry);
    if (progress) {
      *progress << id << ' ' << to_string(rec.status) << " feas=" << fmt(summary.errors.feasibility_error)
                << " opt=" << fmt(summary.errors.optimality_error) << '\n';
    }
    result.runs.push_back(std::move(summary));
  };

  for (const auto& name : plan.problems) {
    const Problem problem = find_problem(name);
    for (const auto& s : plan.solvers) {
      const std::vector<double> noises = is_seeded(s.kind) ? plan.noise : std::vector<double>{0.0};
      const std::vector<std::uint64_t> seeds =
          is_seeded(s.kind) ? plan.seeds : std::vector<std::uint64_t>{0};
      for (double noise : noises) {
        for (std::uint64_t seed : seeds) {
          const std::string id = harness_detail::run_id(name, s, noise, seed);
          RunRecord rec;
          try {
            switch (s.kind) {
              case SolverKind::adaptive: rec = run_adaptive(problem, s.det); break;
              case SolverKind::linesearch: rec = run_linesearch(problem, s.det); break;
              case SolverKind::stochastic: {
                StochConfig cfg = s.stoch;
                cfg.oracle = {noise, seed};
                rec = run_stochastic(problem, cfg);
                break;
              }
              case SolverKind::subgradient: {
                SubgradConfig cfg = s.subgrad;
                cfg.oracle = {noise, seed};
                cfg.feas_tol = plan.feas_tol;
                if (s.tune) {
                  auto tuned = tune_tau(problem, cfg);
                  for (std::size_t i = 0; i < tuned.entries.size(); ++i) {
                    const auto& e = tuned.entries[i];
                    tuning.push_back({id, e.tau, e.errors, i == tuned.best_index});
                  }
                  rec = std::move(tuned.entries[tuned.best_index].record);
                  rec.config["tuned"] = true;
                  rec.config["tau_grid"] = cfg.tau_grid;
                } else {
                  rec = run_subgradient(problem, cfg);
                }
                break;
              }
            }
            rec.solver = s.label;
            rec.config["algorithm"] = std::string(to_string(s.kind));
          } catch (const std::exception& e) {
            rec = harness_detail::failed_record(name, s, noise, seed, e.what());
            rec.config["algorithm"] = std::string(to_string(s.kind));
            ++result.failures;
          }
          persist(std::move(rec), id);
        }
      }
    }
  }

  const fs::path dir(out_dir);
  write_errors_csv(result.runs, (dir / "errors.csv").string());
  write_timings_csv(result.runs, (dir / "timings.csv").string());
  write_profile_csv(profile_from_runs(result.runs, ProfileMetric::iterations, plan.profile_cap),
                    (dir / "profile_iters.csv").string());
  write_profile_csv(profile_from_runs(result.runs, ProfileMetric::fevals, plan.profile_cap),
                    (dir / "profile_fevals.csv").string());
  write_boxplot_csv(boxplots_from_runs(result.runs), (dir / "boxplot.csv").string());
  {
    std::ofstream out(dir / "tuning.csv", std::ios::binary);
    out << "run_id,tau,feasibility_error,optimality_error,selected\n";
    for (const auto& t : tuning) {
      out << t.run_id << ',' << fmt(t.tau) << ',' << fmt(t.errors.feasibility_error) << ','
          << fmt(t.errors.optimality_error) << ',' << (t.selected ? "true" : "false") << '\n';
    }
  }

  nlohmann::ordered_json manifest;
  manifest["tool"] = "stosqp";
  manifest["version"] = kVersion;
  manifest["plan"] = plan.source;
  manifest["config_hash"] = hex64(fnv1a(plan.source.dump()));
  manifest["seeds"] = plan.seeds;
  manifest["noise"] = plan.noise;
  manifest["runs"] = manifest_runs;
  manifest["outputs"] = {"errors.csv", "timings.csv", "profile_iters.csv", "profile_fevals.csv",
                         "boxplot.csv", "tuning.csv"};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  return result;
}

}  // namespace stosqp
