#pragma once

#include <stosqp/kkt.hpp>
#include <stosqp/problem.hpp>
#include <stosqp/record.hpp>

#include <chrono>
#include <cmath>

namespace stosqp {

struct RunOptions {
  /// Called once per completed iteration with the full iterate state.
  IterationObserver observer;
};

namespace solver_detail {

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& v) { return v.allFinite(); }

/// H_k for the chosen policy; the Lagrangian Hessian is taken at (x_k, y_{k-1}).
/// Problems without a Hessian callback fall back to the identity.
inline Matrix hessian(const Problem& p, HessianPolicy policy, const Vector& x,
                      const Vector& y_prev) {
  if (policy == HessianPolicy::lagrangian && p.has_hessian()) {
    return eval_lagrangian_hessian(p, x, y_prev);
  }
  return Matrix::Identity(p.n, p.n);
}

/// Least-squares multiplier, or zero when J is rank deficient. Seeds the
/// Lagrangian-Hessian policy.
inline Vector initial_multiplier(const Vector& g, const Matrix& J) {
  try {
    return least_squares_multiplier(g, J);
  } catch (const LicqFailure&) {
    return Vector::Zero(J.rows());
  }
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline void fill_state(IterationRow& row, int k, double f, const Vector& g, const Vector& c,
                       const Matrix& J) {
  row.k = k;
  row.f = f;
  row.c_inf = norm_inf(c);
  row.stationarity = optimality_error(g, J);
}

inline RunRecord make_record(const Problem& p, std::string solver, HessianPolicy policy) {
  RunRecord rec;
  rec.problem = p.name;
  rec.solver = std::move(solver);
  rec.run_id = rec.problem + "__" + rec.solver;
  rec.h_policy = std::string(to_string(policy));
  return rec;
}

}  // namespace solver_detail
}  // namespace stosqp
