#pragma once

// Built-in test problems. All are small (n <= 10) with exact first and
// second derivatives. Several are classic Hock-Schittkowski instances.
//
// Stored solutions were produced by tools/reference_solutions.py: a scipy
// SLSQP run from x0 polished by Newton's method on the first-order
// conditions in 50-digit arithmetic. Values are rounded to 17 digits.

#include <stosqp/problem.hpp>

#include <cmath>
#include <string_view>
#include <vector>

namespace stosqp {

namespace suite_detail {

inline const char* kProvenance =
    "tools/reference_solutions.py: SLSQP start, 50-digit Newton polish on the KKT system";

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) out[i++] = e;
  return out;
}

inline Problem lin_quad() {
  Problem p;
  p.name = "lin-quad";
  p.n = 2;
  p.m = 1;
  p.objective = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  p.gradient = [](const Vector& x) { return Vector(x); };
  p.constraints = [](const Vector& x) { return vec({x[0] + x[1] - 2.0}); };
  p.jacobian = [](const Vector&) { return Matrix::Ones(1, 2).eval(); };
  p.lagrangian_hessian = [](const Vector&, const Vector&) { return Matrix::Identity(2, 2).eval(); };
  p.x0 = vec({0.0, 0.0});
  p.known_solution = vec({1.0, 1.0});
  p.provenance = kProvenance;
  return p;
}

inline Problem circle_rosen() {
  Problem p;
  p.name = "circle-rosen";
  p.n = 2;
  p.m = 1;
  p.objective = [](const Vector& x) {
    const double a = x[1] - x[0] * x[0];
    return 100.0 * a * a + (1.0 - x[0]) * (1.0 - x[0]);
  };
  p.gradient = [](const Vector& x) {
    const double a = x[1] - x[0] * x[0];
    return vec({-400.0 * x[0] * a - 2.0 * (1.0 - x[0]), 200.0 * a});
  };
  p.constraints = [](const Vector& x) { return vec({x.squaredNorm() - 1.0}); };
  p.jacobian = [](const Vector& x) { return Matrix((2.0 * x).transpose()); };
  p.lagrangian_hessian = [](const Vector& x, const Vector& y) {
    Matrix H(2, 2);
    H << 1200.0 * x[0] * x[0] - 400.0 * x[1] + 2.0, -400.0 * x[0], -400.0 * x[0], 200.0;
    H.diagonal().array() += 2.0 * y[0];
    return H;
  };
  p.x0 = vec({1.0, 1.0});
  p.known_solution = vec({0.78641515416842783, 0.61769831252339348});
  p.provenance = kProvenance;
  return p;
}

inline Problem hs006() {
  Problem p;
  p.name = "hs006";
  p.n = 2;
  p.m = 1;
  p.objective = [](const Vector& x) { return (1.0 - x[0]) * (1.0 - x[0]); };
  p.gradient = [](const Vector& x) { return vec({-2.0 * (1.0 - x[0]), 0.0}); };
  p.constraints = [](const Vector& x) { return vec({10.0 * (x[1] - x[0] * x[0])}); };
  p.jacobian = [](const Vector& x) {
    Matrix J(1, 2);
    J << -20.0 * x[0], 10.0;
    return J;
  };
  p.lagrangian_hessian = [](const Vector&, const Vector& y) {
    Matrix H = Matrix::Zero(2, 2);
    H(0, 0) = 2.0 - 20.0 * y[0];
    return H;
  };
  p.x0 = vec({-1.2, 1.0});
  p.known_solution = vec({1.0, 1.0});
  p.provenance = kProvenance;
  return p;
}

inline Problem hs007() {
  Problem p;
  p.name = "hs007";
  p.n = 2;
  p.m = 1;
  p.objective = [](const Vector& x) { return std::log(1.0 + x[0] * x[0]) - x[1]; };
  p.gradient = [](const Vector& x) { return vec({2.0 * x[0] / (1.0 + x[0] * x[0]), -1.0}); };
  p.constraints = [](const Vector& x) {
    const double s = 1.0 + x[0] * x[0];
    return vec({s * s + x[1] * x[1] - 4.0});
  };
  p.jacobian = [](const Vector& x) {
    Matrix J(1, 2);
    J << 4.0 * x[0] * (1.0 + x[0] * x[0]), 2.0 * x[1];
    return J;
  };
  p.lagrangian_hessian = [](const Vector& x, const Vector& y) {
    const double s = 1.0 + x[0] * x[0];
    Matrix H = Matrix::Zero(2, 2);
    H(0, 0) = 2.0 * (1.0 - x[0] * x[0]) / (s * s) + y[0] * (4.0 + 12.0 * x[0] * x[0]);
    H(1, 1) = 2.0 * y[0];
    return H;
  };
  p.x0 = vec({2.0, 2.0});
  p.known_solution = vec({0.0, 1.7320508075688773});
  p.provenance = kProvenance;
  return p;
}

inline Problem hs028() {
  Problem p;
  p.name = "hs028";
  p.n = 3;
  p.m = 1;
  p.objective = [](const Vector& x) {
    const double a = x[0] + x[1];
    const double b = x[1] + x[2];
    return a * a + b * b;
  };
  p.gradient = [](const Vector& x) {
    const double a = x[0] + x[1];
    const double b = x[1] + x[2];
    return vec({2.0 * a, 2.0 * a + 2.0 * b, 2.0 * b});
  };
  p.constraints = [](const Vector& x) { return vec({x[0] + 2.0 * x[1] + 3.0 * x[2] - 1.0}); };
  p.jacobian = [](const Vector&) {
    Matrix J(1, 3);
    J << 1.0, 2.0, 3.0;
    return J;
  };
  p.lagrangian_hessian = [](const Vector&, const Vector&) {
    Matrix H(3, 3);
    H << 2.0, 2.0, 0.0, 2.0, 4.0, 2.0, 0.0, 2.0, 2.0;
    return H;
  };
  p.x0 = vec({-4.0, 1.0, 1.0});
  p.known_solution = vec({0.5, -0.5, 0.5});
  p.provenance = kProvenance;
  return p;
}

inline Problem hs039() {
  Problem p;
  p.name = "hs039";
  p.n = 4;
  p.m = 2;
  p.objective = [](const Vector& x) { return -x[0]; };
  p.gradient = [](const Vector&) { return vec({-1.0, 0.0, 0.0, 0.0}); };
  p.constraints = [](const Vector& x) {
    return vec({x[1] - x[0] * x[0] * x[0] - x[2] * x[2], x[0] * x[0] - x[1] - x[3] * x[3]});
  };
  p.jacobian = [](const Vector& x) {
    Matrix J(2, 4);
    J << -3.0 * x[0] * x[0], 1.0, -2.0 * x[2], 0.0,
          2.0 * x[0], -1.0, 0.0, -2.0 * x[3];
    return J;
  };
  p.lagrangian_hessian = [](const Vector& x, const Vector& y) {
    Matrix H = Matrix::Zero(4, 4);
    H(0, 0) = -6.0 * x[0] * y[0] + 2.0 * y[1];
    H(2, 2) = -2.0 * y[0];
    H(3, 3) = -2.0 * y[1];
    return H;
  };
  p.x0 = vec({2.0, 2.0, 2.0, 2.0});
  p.known_solution = vec({1.0, 1.0, 0.0, 0.0});
  p.provenance = kProvenance;
  return p;
}

inline Problem hs040() {
  Problem p;
  p.name = "hs040";
  p.n = 4;
  p.m = 3;
  p.objective = [](const Vector& x) { return -x.prod(); };
  p.gradient = [](const Vector& x) {
    return vec({-x[1] * x[2] * x[3], -x[0] * x[2] * x[3], -x[0] * x[1] * x[3],
                -x[0] * x[1] * x[2]});
  };
  p.constraints = [](const Vector& x) {
    return vec({x[0] * x[0] * x[0] + x[1] * x[1] - 1.0, x[0] * x[0] * x[3] - x[2],
                x[3] * x[3] - x[1]});
  };
  p.jacobian = [](const Vector& x) {
    Matrix J(3, 4);
    J << 3.0 * x[0] * x[0], 2.0 * x[1], 0.0, 0.0,
         2.0 * x[0] * x[3], 0.0, -1.0, x[0] * x[0],
         0.0, -1.0, 0.0, 2.0 * x[3];
    return J;
  };
  p.lagrangian_hessian = [](const Vector& x, const Vector& y) {
    Matrix H = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (i == j) continue;
        double prod = -1.0;
        for (int k = 0; k < 4; ++k) {
          if (k != i && k != j) prod *= x[k];
        }
        H(i, j) = prod;
      }
    }
    H(0, 0) += 6.0 * x[0] * y[0] + 2.0 * x[3] * y[1];
    H(1, 1) += 2.0 * y[0];
    H(0, 3) += 2.0 * x[0] * y[1];
    H(3, 0) += 2.0 * x[0] * y[1];
    H(3, 3) += 2.0 * y[2];
    return H;
  };
  p.x0 = vec({0.8, 0.8, 0.8, 0.8});
  p.known_solution =
      vec({0.79370052598409974, 0.70710678118654752, 0.52973154717964763, 0.84089641525371454});
  p.provenance = kProvenance;
  return p;
}

inline Problem hs048() {
  Problem p;
  p.name = "hs048";
  p.n = 5;
  p.m = 2;
  p.objective = [](const Vector& x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - x[2]) * (x[1] - x[2]) +
           (x[3] - x[4]) * (x[3] - x[4]);
  };
  p.gradient = [](const Vector& x) {
    const double a = x[1] - x[2];
    const double b = x[3] - x[4];
    return vec({2.0 * (x[0] - 1.0), 2.0 * a, -2.0 * a, 2.0 * b, -2.0 * b});
  };
  p.constraints = [](const Vector& x) {
    return vec({x.sum() - 5.0, x[2] - 2.0 * (x[3] + x[4]) + 3.0});
  };
  p.jacobian = [](const Vector&) {
    Matrix J(2, 5);
    J << 1.0, 1.0, 1.0, 1.0, 1.0,
         0.0, 0.0, 1.0, -2.0, -2.0;
    return J;
  };
  p.lagrangian_hessian = [](const Vector&, const Vector&) {
    Matrix H = Matrix::Zero(5, 5);
    H(0, 0) = 2.0;
    H(1, 1) = H(2, 2) = H(3, 3) = H(4, 4) = 2.0;
    H(1, 2) = H(2, 1) = H(3, 4) = H(4, 3) = -2.0;
    return H;
  };
  p.x0 = vec({3.0, 5.0, -3.0, 2.0, -2.0});
  p.known_solution = vec({1.0, 1.0, 1.0, 1.0, 1.0});
  p.provenance = kProvenance;
  return p;
}

/// Nonconvex product objective on three nonlinear constraints, n = 5, m = 3.
inline Problem hs078() {
  Problem p;
  p.name = "hs078";
  p.n = 5;
  p.m = 3;
  p.objective = [](const Vector& x) { return x.prod(); };
  p.gradient = [](const Vector& x) {
    Vector g(5);
    for (int i = 0; i < 5; ++i) {
      double prod = 1.0;
      for (int j = 0; j < 5; ++j) {
        if (j != i) prod *= x[j];
      }
      g[i] = prod;
    }
    return g;
  };
  p.constraints = [](const Vector& x) {
    return vec({x.squaredNorm() - 10.0, x[1] * x[2] - 5.0 * x[3] * x[4],
                x[0] * x[0] * x[0] + x[1] * x[1] * x[1] + 1.0});
  };
  p.jacobian = [](const Vector& x) {
    Matrix J = Matrix::Zero(3, 5);
    J.row(0) = 2.0 * x.transpose();
    J(1, 1) = x[2];
    J(1, 2) = x[1];
    J(1, 3) = -5.0 * x[4];
    J(1, 4) = -5.0 * x[3];
    J(2, 0) = 3.0 * x[0] * x[0];
    J(2, 1) = 3.0 * x[1] * x[1];
    return J;
  };
  p.lagrangian_hessian = [](const Vector& x, const Vector& y) {
    Matrix H = Matrix::Zero(5, 5);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        if (i == j) continue;
        double prod = 1.0;
        for (int k = 0; k < 5; ++k) {
          if (k != i && k != j) prod *= x[k];
        }
        H(i, j) = prod;
      }
    }
    H.diagonal().array() += 2.0 * y[0];
    H(1, 2) += y[1];
    H(2, 1) += y[1];
    H(3, 4) -= 5.0 * y[1];
    H(4, 3) -= 5.0 * y[1];
    H(0, 0) += 6.0 * x[0] * y[2];
    H(1, 1) += 6.0 * x[1] * y[2];
    return H;
  };
  p.x0 = vec({-2.0, 1.5, 2.0, -1.0, -1.0});
  p.known_solution = vec({-1.7171435703943823, 1.5957096901835544, 1.8272457529271946,
                          -0.76364307818413038, -0.76364307818413038});
  p.provenance = kProvenance;
  return p;
}

/// Rosenbrock-like chain on a sphere, n = 10, m = 2.
inline Problem chain10() {
  constexpr int n = 10;
  Problem p;
  p.name = "chain10";
  p.n = n;
  p.m = 2;
  p.objective = [](const Vector& x) {
    double f = 0.1 * (x.array() - 1.0).square().sum();
    for (int i = 0; i + 1 < n; ++i) {
      const double r = x[i + 1] - x[i] * x[i];
      f += r * r;
    }
    return f;
  };
  p.gradient = [](const Vector& x) {
    Vector g = 0.2 * (x.array() - 1.0).matrix();
    for (int i = 0; i + 1 < n; ++i) {
      const double r = x[i + 1] - x[i] * x[i];
      g[i] -= 4.0 * x[i] * r;
      g[i + 1] += 2.0 * r;
    }
    return g;
  };
  p.constraints = [](const Vector& x) { return vec({x.squaredNorm() - 8.0, x[0] - x[n - 1]}); };
  p.jacobian = [](const Vector& x) {
    Matrix J = Matrix::Zero(2, n);
    J.row(0) = 2.0 * x.transpose();
    J(1, 0) = 1.0;
    J(1, n - 1) = -1.0;
    return J;
  };
  p.lagrangian_hessian = [](const Vector& x, const Vector& y) {
    Matrix H = Matrix::Identity(n, n) * (0.2 + 2.0 * y[0]);
    for (int i = 0; i + 1 < n; ++i) {
      const double r = x[i + 1] - x[i] * x[i];
      H(i, i) += -4.0 * r + 8.0 * x[i] * x[i];
      H(i, i + 1) -= 4.0 * x[i];
      H(i + 1, i) -= 4.0 * x[i];
      H(i + 1, i + 1) += 2.0;
    }
    return H;
  };
  p.x0 = Vector::Constant(n, 0.5);
  p.known_solution = vec({0.87814682575305001, 0.89104353564578103, 0.8980256705559179,
                          0.90161402462152789, 0.90312540638900499, 0.90311907538806027,
                          0.90159396930720276, 0.89799042719183581, 0.89100039912310486,
                          0.87814682575305001});
  p.provenance = kProvenance;
  return p;
}

}  // namespace suite_detail

inline std::vector<Problem> builtin_suite() {
  using namespace suite_detail;
  return {lin_quad(), circle_rosen(), hs006(), hs007(), hs028(),
          hs039(),    hs040(),        hs048(), hs078(), chain10()};
}

/// Looks up a built-in problem by name.
inline Problem find_problem(std::string_view name) {
  for (auto& p : builtin_suite()) {
    if (p.name == name) return p;
  }
  throw ContractViolation("unknown problem '" + std::string(name) + "'");
}

}  // namespace stosqp
