#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stosqp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a caller or callback breaks a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The constraint Jacobian lost full row rank (LICQ does not hold).
class LicqFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The inertia-correction ladder ran past its ceiling.
class IndefiniteKkt : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Status : std::uint8_t {
  success,
  iteration_limit,
  budget_exhausted,
  licq_failure,
  indefinite_failure,
  numerical_failure,
  linesearch_failure,
};

constexpr std::string_view to_string(Status s) {
  switch (s) {
    case Status::success: return "success";
    case Status::iteration_limit: return "iteration_limit";
    case Status::budget_exhausted: return "budget_exhausted";
    case Status::licq_failure: return "licq_failure";
    case Status::indefinite_failure: return "indefinite_failure";
    case Status::numerical_failure: return "numerical_failure";
    case Status::linesearch_failure: return "linesearch_failure";
  }
  return "unknown";
}

inline Status status_from_string(std::string_view s) {
  for (auto st : {Status::success, Status::iteration_limit, Status::budget_exhausted,
                  Status::licq_failure, Status::indefinite_failure,
                  Status::numerical_failure, Status::linesearch_failure}) {
    if (to_string(st) == s) return st;
  }
  throw ContractViolation("unknown status '" + std::string(s) + "'");
}

/// Which of the three stepsize cases produced alpha. `skipped` marks a
/// stochastic iteration whose direction vanished; `fixed` marks the
/// constant-stepsize baseline; `backtrack` marks the line-search solver.
enum class Branch : std::uint8_t { below_one, unit, above_one, skipped, fixed, backtrack };

constexpr std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::below_one: return "below_one";
    case Branch::unit: return "unit";
    case Branch::above_one: return "above_one";
    case Branch::skipped: return "skipped";
    case Branch::fixed: return "fixed";
    case Branch::backtrack: return "backtrack";
  }
  return "unknown";
}

inline Branch branch_from_string(std::string_view s) {
  for (auto b : {Branch::below_one, Branch::unit, Branch::above_one, Branch::skipped,
                 Branch::fixed, Branch::backtrack}) {
    if (to_string(b) == s) return b;
  }
  throw ContractViolation("unknown branch '" + std::string(s) + "'");
}

/// Choice of the (1,1) block of the KKT matrix.
enum class HessianPolicy : std::uint8_t { identity, lagrangian };

constexpr std::string_view to_string(HessianPolicy p) {
  return p == HessianPolicy::identity ? "identity" : "lagrangian";
}

inline HessianPolicy hessian_policy_from_string(std::string_view s) {
  if (s == "identity") return HessianPolicy::identity;
  if (s == "lagrangian") return HessianPolicy::lagrangian;
  throw ContractViolation("unknown hessian policy '" + std::string(s) + "'");
}

inline double norm1(const Vector& v) { return v.lpNorm<1>(); }
inline double norm_inf(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

}  // namespace stosqp
