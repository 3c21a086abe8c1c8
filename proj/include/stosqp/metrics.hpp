#pragma once

// Post-hoc metrics over run logs: error extraction, performance profiles and
// box-plot summaries.

#include <stosqp/record.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace stosqp {

struct ErrorPair {
  double feasibility_error = 0.0;
  double optimality_error = 0.0;
  int at_iteration = 0;
  bool was_feasible = false;
};

/// Reports the errors at the last iterate with ||c_k||_inf <= tol * max(1, ||c_0||_inf),
/// or at the least infeasible iterate (first on ties) when there is none.
inline ErrorPair extract_errors(const RunRecord& rec, double tol = 1e-6) {
  if (rec.rows.empty()) throw ContractViolation("extract_errors: record has no rows");
  const double threshold = tol * std::max(1.0, rec.rows.front().c_inf);
  auto pair_at = [](const IterationRow& r, bool feasible) {
    return ErrorPair{r.c_inf, r.stationarity, r.k, feasible};
  };
  for (auto it = rec.rows.rbegin(); it != rec.rows.rend(); ++it) {
    if (it->c_inf <= threshold) return pair_at(*it, true);
  }
  const auto best = std::min_element(
      rec.rows.begin(), rec.rows.end(),
      [](const IterationRow& a, const IterationRow& b) { return a.c_inf < b.c_inf; });
  return pair_at(*best, false);
}

struct PerformanceProfile {
  std::vector<std::string> solvers;
  std::vector<std::string> instances;
  /// ratios[p][s]; +inf marks a failure.
  std::vector<std::vector<double>> ratios;
  std::vector<double> breakpoints;
  /// rho[s][t] is the fraction of instances with ratio <= breakpoints[t].
  std::vector<std::vector<double>> rho;

  /// Fraction of instances solver s solves within factor t of the best.
  double at(std::size_t s, double t) const {
    if (instances.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& row : ratios) hits += row[s] <= t ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(instances.size());
  }
};

/// metric[p][s] holds a positive value, or +inf (or NaN) for a failed run.
inline PerformanceProfile performance_profile(const std::vector<std::string>& instances,
                                              const std::vector<std::string>& solvers,
                                              const std::vector<std::vector<double>>& metric,
                                              double cap = 20.0) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (metric.size() != instances.size()) {
    throw ContractViolation("performance_profile: one metric row per instance");
  }
  PerformanceProfile out;
  out.solvers = solvers;
  out.instances = instances;
  std::vector<double> points{1.0, cap};
  for (const auto& row : metric) {
    if (row.size() != solvers.size()) {
      throw ContractViolation("performance_profile: one metric column per solver");
    }
    double best = inf;
    for (double v : row) {
      if (std::isfinite(v)) {
        if (!(v > 0.0)) throw ContractViolation("performance_profile: metric must be positive");
        best = std::min(best, v);
      }
    }
    std::vector<double> r(row.size(), inf);
    for (std::size_t s = 0; s < row.size(); ++s) {
      if (std::isfinite(row[s]) && std::isfinite(best)) {
        r[s] = row[s] / best;
        if (r[s] <= cap) points.push_back(r[s]);
      }
    }
    out.ratios.push_back(std::move(r));
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  out.breakpoints = points;
  out.rho.assign(solvers.size(), {});
  for (std::size_t s = 0; s < solvers.size(); ++s) {
    for (double t : points) out.rho[s].push_back(out.at(s, t));
  }
  return out;
}

/// Quantile with linear interpolation between order statistics
/// (h = (n-1) p), the default of most statistics packages.
inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw ContractViolation("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct BoxSummary {
  std::size_t count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  /// Extremes of the points inside the 1.5 IQR fences.
  double whisker_lo = 0.0, whisker_hi = 0.0;
  std::vector<double> outliers;
};

inline BoxSummary boxplot_data(const std::vector<double>& values) {
  if (values.empty()) throw ContractViolation("boxplot_data: empty group");
  BoxSummary b;
  b.count = values.size();
  b.min = *std::min_element(values.begin(), values.end());
  b.max = *std::max_element(values.begin(), values.end());
  b.q1 = quantile(values, 0.25);
  b.median = quantile(values, 0.5);
  b.q3 = quantile(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo = b.q1 - 1.5 * iqr;
  const double hi = b.q3 + 1.5 * iqr;
  b.whisker_lo = b.max;
  b.whisker_hi = b.min;
  for (double v : values) {
    if (v < lo || v > hi) {
      b.outliers.push_back(v);
    } else {
      b.whisker_lo = std::min(b.whisker_lo, v);
      b.whisker_hi = std::max(b.whisker_hi, v);
    }
  }
  std::sort(b.outliers.begin(), b.outliers.end());
  return b;
}

}  // namespace stosqp
