#pragma once

#include <stosqp/problem.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace stosqp {

/// Central-difference step for coordinate value xi.
inline double fd_step(double xi) {
  static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  return base * std::max(1.0, std::abs(xi));
}

inline Vector fd_gradient(const Problem& p, const Vector& x) {
  Vector g(p.n);
  Vector xp = x;
  for (int i = 0; i < p.n; ++i) {
    const double h = fd_step(x[i]);
    xp[i] = x[i] + h;
    const double fp = eval_objective(p, xp);
    xp[i] = x[i] - h;
    const double fm = eval_objective(p, xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline Matrix fd_jacobian(const Problem& p, const Vector& x) {
  Matrix J(p.m, p.n);
  Vector xp = x;
  for (int i = 0; i < p.n; ++i) {
    const double h = fd_step(x[i]);
    xp[i] = x[i] + h;
    const Vector cp = eval_constraints(p, xp);
    xp[i] = x[i] - h;
    const Vector cm = eval_constraints(p, xp);
    xp[i] = x[i];
    J.col(i) = (cp - cm) / (2.0 * h);
  }
  return J;
}

struct DerivativeCheck {
  double gradient_error = 0.0;  // relative, infinity norm
  double jacobian_error = 0.0;
  bool passed(double tol) const { return gradient_error <= tol && jacobian_error <= tol; }
};

/// Compares analytic derivatives with central differences at x. Errors are
/// scaled by max(1, |analytic|) entrywise.
inline DerivativeCheck check_derivatives(const Problem& p, const Vector& x) {
  auto rel = [](const Matrix& exact, const Matrix& approx) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < exact.size(); ++i) {
      const double e = exact.data()[i];
      worst = std::max(worst, std::abs(e - approx.data()[i]) / std::max(1.0, std::abs(e)));
    }
    return worst;
  };
  DerivativeCheck out;
  out.gradient_error = rel(eval_gradient(p, x), fd_gradient(p, x));
  out.jacobian_error = rel(eval_jacobian(p, x), fd_jacobian(p, x));
  return out;
}

}  // namespace stosqp
