#pragma once

#include <stosqp/core.hpp>
#include <stosqp/merit.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace stosqp {

/// One logged iteration. Quantities that do not apply to a solver stay NaN
/// and serialize as null.
struct IterationRow {
  static constexpr double none = std::numeric_limits<double>::quiet_NaN();

  int k = 0;
  double f = none;
  double c_inf = none;
  /// ||g + J^T y||_inf with the least-squares multiplier and the true gradient.
  double stationarity = none;
  /// Same residual with the multiplier returned by the KKT solve.
  double kkt_dual = none;
  double tau = none;
  double tau_trial = none;         // +inf when the trial value is infinite
  double tau_shadow = none;        // deterministic rule driven by the true gradient
  double tau_trial_shadow = none;
  double xi = none;
  double xi_trial = none;
  double beta = none;
  double alpha = none;
  Branch branch = Branch::fixed;
  double d_norm = none;
  double dq = none;
  double inertia_shift = none;
  double lipschitz = none;  // L in use
  double gamma_sum = none;  // Gamma in use
  int trials = 0;
  std::int64_t fevals = 0;  // cumulative objective evaluations
  bool stepsize_warning = false;
};

struct RunRecord {
  std::string run_id;
  std::string problem;
  std::string solver;
  std::uint64_t seed = 0;
  double noise = 0.0;
  std::string h_policy = "identity";
  nlohmann::json config = nlohmann::json::object();
  std::vector<IterationRow> rows;
  Status status = Status::iteration_limit;
  std::string message;
  std::int64_t fevals = 0;
  Vector x_final;
  double wall_time_s = 0.0;

  /// Iterations taken; a run stopping at k has performed k steps.
  int iterations() const { return rows.empty() ? 0 : rows.back().k; }
};

/// Everything a solver knows at the end of iteration k, for invariant checks.
struct IterationDetail {
  int k = 0;
  Vector x, d, y;
  Vector g_used;  // gradient that produced d
  Vector g_true;
  Vector c;
  Matrix J;
  Matrix H;  // including any inertia shift
  double f = 0.0;
  double tau_prev = 0.0, tau = 0.0;
  TrialValue tau_trial = TrialValue::infinite();
  double xi_prev = 0.0, xi = 0.0, xi_trial = 0.0;
  double dq = 0.0;
  double alpha = 0.0;
  Branch branch = Branch::fixed;
  double phi_old = 0.0, phi_new = 0.0;  // at tau
  double alpha_hat_init = 0.0, alpha_tilde_init = 0.0;
  double alpha_hat = 0.0, alpha_tilde = 0.0;
  double interval_lo = 0.0, interval_hi = 0.0;
  double beta = 0.0;
  double lipschitz = 0.0;
  Vector gamma;
  double inertia_shift = 0.0;
  int trials = 0;
};

using IterationObserver = std::function<void(const IterationDetail&)>;

// ---------------------------------------------------------------------------
// Line-delimited JSON persistence: header line, one line per row, footer line.

namespace record_detail {

inline nlohmann::json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double num(const nlohmann::json& j) {
  if (j.is_null()) return IterationRow::none;
  if (j.is_string()) {
    return j.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                         : -std::numeric_limits<double>::infinity();
  }
  return j.get<double>();
}

}  // namespace record_detail

inline nlohmann::ordered_json row_to_json(const IterationRow& r) {
  using record_detail::num;
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["f"] = num(r.f);
  j["c_inf"] = num(r.c_inf);
  j["stationarity"] = num(r.stationarity);
  j["kkt_dual"] = num(r.kkt_dual);
  j["tau"] = num(r.tau);
  j["tau_trial"] = num(r.tau_trial);
  j["tau_shadow"] = num(r.tau_shadow);
  j["tau_trial_shadow"] = num(r.tau_trial_shadow);
  j["xi"] = num(r.xi);
  j["xi_trial"] = num(r.xi_trial);
  j["beta"] = num(r.beta);
  j["alpha"] = num(r.alpha);
  j["branch"] = std::string(to_string(r.branch));
  j["d_norm"] = num(r.d_norm);
  j["dq"] = num(r.dq);
  j["inertia_shift"] = num(r.inertia_shift);
  j["L"] = num(r.lipschitz);
  j["Gamma"] = num(r.gamma_sum);
  j["trials"] = r.trials;
  j["fevals"] = r.fevals;
  j["stepsize_warning"] = r.stepsize_warning;
  return j;
}

inline IterationRow row_from_json(const nlohmann::json& j) {
  using record_detail::num;
  IterationRow r;
  r.k = j.at("k").get<int>();
  r.f = num(j.at("f"));
  r.c_inf = num(j.at("c_inf"));
  r.stationarity = num(j.at("stationarity"));
  r.kkt_dual = num(j.at("kkt_dual"));
  r.tau = num(j.at("tau"));
  r.tau_trial = num(j.at("tau_trial"));
  r.tau_shadow = num(j.at("tau_shadow"));
  r.tau_trial_shadow = num(j.at("tau_trial_shadow"));
  r.xi = num(j.at("xi"));
  r.xi_trial = num(j.at("xi_trial"));
  r.beta = num(j.at("beta"));
  r.alpha = num(j.at("alpha"));
  r.branch = branch_from_string(j.at("branch").get<std::string>());
  r.d_norm = num(j.at("d_norm"));
  r.dq = num(j.at("dq"));
  r.inertia_shift = num(j.at("inertia_shift"));
  r.lipschitz = num(j.at("L"));
  r.gamma_sum = num(j.at("Gamma"));
  r.trials = j.at("trials").get<int>();
  r.fevals = j.at("fevals").get<std::int64_t>();
  r.stepsize_warning = j.at("stepsize_warning").get<bool>();
  return r;
}

/// Serialized log. Wall time is deliberately left out so that reruns are
/// byte-identical.
inline std::string record_to_jsonl(const RunRecord& rec) {
  std::ostringstream os;
  nlohmann::ordered_json head;
  head["type"] = "header";
  head["run_id"] = rec.run_id;
  head["problem"] = rec.problem;
  head["solver"] = rec.solver;
  head["seed"] = rec.seed;
  head["noise"] = rec.noise;
  head["h_policy"] = rec.h_policy;
  head["config"] = nlohmann::ordered_json::parse(rec.config.dump());
  os << head.dump() << '\n';
  for (const auto& r : rec.rows) {
    nlohmann::ordered_json j;
    j["type"] = "row";
    const auto fields = row_to_json(r);
    for (const auto& [key, value] : fields.items()) j[key] = value;
    os << j.dump() << '\n';
  }
  nlohmann::ordered_json foot;
  foot["type"] = "footer";
  foot["status"] = std::string(to_string(rec.status));
  foot["message"] = rec.message;
  foot["iterations"] = rec.iterations();
  foot["fevals"] = rec.fevals;
  std::vector<double> xf(rec.x_final.data(), rec.x_final.data() + rec.x_final.size());
  foot["x_final"] = xf;
  os << foot.dump() << '\n';
  return os.str();
}

inline RunRecord record_from_jsonl(std::istream& in) {
  RunRecord rec;
  std::string line;
  bool have_footer = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto type = j.at("type").get<std::string>();
    if (type == "header") {
      rec.run_id = j.at("run_id").get<std::string>();
      rec.problem = j.at("problem").get<std::string>();
      rec.solver = j.at("solver").get<std::string>();
      rec.seed = j.at("seed").get<std::uint64_t>();
      rec.noise = j.at("noise").get<double>();
      rec.h_policy = j.at("h_policy").get<std::string>();
      rec.config = j.at("config");
    } else if (type == "row") {
      rec.rows.push_back(row_from_json(j));
    } else if (type == "footer") {
      rec.status = status_from_string(j.at("status").get<std::string>());
      rec.message = j.at("message").get<std::string>();
      rec.fevals = j.at("fevals").get<std::int64_t>();
      const auto xf = j.at("x_final").get<std::vector<double>>();
      rec.x_final = Eigen::Map<const Vector>(xf.data(), static_cast<Eigen::Index>(xf.size()));
      have_footer = true;
    }
  }
  if (!have_footer) throw ContractViolation("run record has no footer line");
  return rec;
}

inline void write_record(const RunRecord& rec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << record_to_jsonl(rec);
}

inline RunRecord read_record(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return record_from_jsonl(in);
}

}  // namespace stosqp
