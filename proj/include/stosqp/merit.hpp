#pragma once

#include <stosqp/core.hpp>

#include <algorithm>
#include <limits>

namespace stosqp {

/// A positive scalar or +infinity. Trial values of the merit parameter are
/// infinite when the model gives no reason to reduce it.
class TrialValue {
 public:
  static constexpr TrialValue infinite() { return TrialValue(true, 0.0); }
  static constexpr TrialValue finite(double v) { return TrialValue(false, v); }

  constexpr bool is_infinite() const { return infinite_; }
  /// Only meaningful when finite.
  constexpr double value() const { return value_; }
  /// IEEE view, for logging.
  constexpr double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  /// x <= *this, exact for the infinite case.
  constexpr bool bounds(double x) const { return infinite_ || x <= value_; }

  friend constexpr bool operator==(TrialValue a, TrialValue b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  constexpr TrialValue(bool inf, double v) : infinite_(inf), value_(v) {}
  bool infinite_;
  double value_;
};

/// Merit parameter state carried across iterations.
struct MeritParams {
  double tau = 1.0;
  TrialValue tau_trial = TrialValue::infinite();
  double xi = 1.0;
  double xi_trial = 1.0;
  double sigma = 0.5;
  double epsilon = 1e-6;
};

/// phi(x, tau) = tau f + ||c||_1
inline double phi(double f, const Vector& c, double tau) { return tau * f + norm1(c); }

/// Model reduction given the curvature term d^T H d.
inline double delta_q(double gtd, double dHd, double c_norm1, double tau) {
  return -tau * (gtd + 0.5 * std::max(dHd, 0.0)) + c_norm1;
}

inline double delta_q(const Vector& g, const Vector& d, const Matrix& H, const Vector& c,
                      double tau) {
  return delta_q(g.dot(d), d.dot(H * d), norm1(c), tau);
}

struct TauUpdate {
  double tau;
  TrialValue tau_trial;
};

/// Infinite when the denominator is nonpositive. A feasible point (c = 0)
/// always yields an infinite trial value, whatever rounding does to the
/// denominator, so a finite trial value is always positive.
inline TrialValue tau_trial_value(double gtd, double dHd, double c_norm1, double sigma) {
  const double denom = gtd + std::max(dHd, 0.0);
  if (denom <= 0.0 || c_norm1 == 0.0) return TrialValue::infinite();
  return TrialValue::finite((1.0 - sigma) * c_norm1 / denom);
}

inline TauUpdate update_tau(double prev_tau, double gtd, double dHd, double c_norm1,
                            double sigma, double epsilon) {
  const TrialValue trial = tau_trial_value(gtd, dHd, c_norm1, sigma);
  if (trial.bounds(prev_tau)) return {prev_tau, trial};
  return {(1.0 - epsilon) * trial.value(), trial};
}

inline TauUpdate update_tau(double prev_tau, const Vector& g, const Vector& d, const Matrix& H,
                            const Vector& c, double sigma, double epsilon) {
  return update_tau(prev_tau, g.dot(d), d.dot(H * d), norm1(c), sigma, epsilon);
}

struct XiUpdate {
  double xi;
  double xi_trial;
};

inline XiUpdate update_xi(double prev_xi, double dq, double tau, double d_norm2sq,
                          double epsilon) {
  if (!(d_norm2sq > 0.0)) throw ContractViolation("update_xi: requires d != 0");
  const double trial = dq / (tau * d_norm2sq);
  if (prev_xi <= trial) return {prev_xi, trial};
  return {(1.0 - epsilon) * trial, trial};
}

inline bool sufficient_decrease(double phi_new, double phi_old, double alpha, double dq,
                                double eta) {
  return phi_new <= phi_old - eta * alpha * dq;
}

/// Valid when c + J d = 0.
inline double directional_derivative(double gtd, double c_norm1, double tau) {
  return tau * gtd - c_norm1;
}

inline double directional_derivative(const Vector& g, const Vector& d, const Vector& c,
                                     double tau) {
  return directional_derivative(g.dot(d), norm1(c), tau);
}

}  // namespace stosqp
