#pragma once

#include <stosqp/core.hpp>

#include <functional>
#include <optional>
#include <string>

namespace stosqp {

/// Smooth equality-constrained problem: min f(x) s.t. c(x) = 0.
///
/// Callbacks are pure functions of their arguments, so a Problem may be
/// shared by concurrent runs once constructed.
struct Problem {
  std::string name;
  int n = 0;
  int m = 0;
  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&)> constraints;
  /// m x n, row i is the transposed gradient of c_i.
  std::function<Matrix(const Vector&)> jacobian;
  /// Hessian of f(x) + c(x)^T y with respect to x. Optional.
  std::function<Matrix(const Vector&, const Vector&)> lagrangian_hessian;
  Vector x0;
  std::optional<Vector> known_solution;
  /// Where known_solution came from.
  std::string provenance;

  bool has_hessian() const { return static_cast<bool>(lagrangian_hessian); }
};

/// f, g, c and J at a single point.
struct Evaluation {
  double f = 0.0;
  Vector g;
  Vector c;
  Matrix J;
};

namespace detail {

inline void expect_size(const Problem& p, const char* callback, Eigen::Index got,
                        Eigen::Index want) {
  if (got != want) {
    throw ContractViolation("problem '" + p.name + "': " + callback + " returned size " +
                            std::to_string(got) + ", expected " + std::to_string(want));
  }
}

}  // namespace detail

inline void validate(const Problem& p) {
  if (p.n <= 0 || p.m <= 0 || p.m >= p.n) {
    throw ContractViolation("problem '" + p.name + "': need 0 < m < n");
  }
  if (!p.objective || !p.gradient || !p.constraints || !p.jacobian) {
    throw ContractViolation("problem '" + p.name + "': missing callback");
  }
  detail::expect_size(p, "x0", p.x0.size(), p.n);
}

inline double eval_objective(const Problem& p, const Vector& x) {
  detail::expect_size(p, "x", x.size(), p.n);
  return p.objective(x);
}

inline Vector eval_gradient(const Problem& p, const Vector& x) {
  detail::expect_size(p, "x", x.size(), p.n);
  Vector g = p.gradient(x);
  detail::expect_size(p, "gradient", g.size(), p.n);
  return g;
}

inline Vector eval_constraints(const Problem& p, const Vector& x) {
  detail::expect_size(p, "x", x.size(), p.n);
  Vector c = p.constraints(x);
  detail::expect_size(p, "constraints", c.size(), p.m);
  return c;
}

inline Matrix eval_jacobian(const Problem& p, const Vector& x) {
  detail::expect_size(p, "x", x.size(), p.n);
  Matrix J = p.jacobian(x);
  detail::expect_size(p, "jacobian (rows)", J.rows(), p.m);
  detail::expect_size(p, "jacobian (cols)", J.cols(), p.n);
  return J;
}

inline Matrix eval_lagrangian_hessian(const Problem& p, const Vector& x, const Vector& y) {
  if (!p.has_hessian()) {
    throw ContractViolation("problem '" + p.name + "': no lagrangian_hessian callback");
  }
  detail::expect_size(p, "y", y.size(), p.m);
  Matrix H = p.lagrangian_hessian(x, y);
  detail::expect_size(p, "lagrangian_hessian (rows)", H.rows(), p.n);
  detail::expect_size(p, "lagrangian_hessian (cols)", H.cols(), p.n);
  return H;
}

inline Evaluation evaluate(const Problem& p, const Vector& x) {
  return {eval_objective(p, x), eval_gradient(p, x), eval_constraints(p, x),
          eval_jacobian(p, x)};
}

}  // namespace stosqp
