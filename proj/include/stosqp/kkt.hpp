#pragma once

#include <stosqp/core.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

namespace stosqp {

struct InertiaOptions {
  /// First nonzero shift is delta0_scale * max(1, ||H||_inf).
  double delta0_scale = 1e-8;
  double growth = 10.0;
  double delta_max = 1e8;
  /// LICQ fails when sigma_min(J) <= rank_tol * max(1, ||J||_2).
  double rank_tol = 1e-10;
};

struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
  friend bool operator==(const Inertia&, const Inertia&) = default;
};

struct KktSolution {
  Vector d;
  Vector y;
  /// Multiple of the identity added to H before the solve.
  double inertia_shift = 0.0;
  /// max of the two block residual infinity norms.
  double residual_norm = 0.0;
  Inertia inertia;
};

struct Decomposition {
  Vector u;  // in Null(J)
  Vector v;  // in Range(J^T)
  Matrix Z;  // orthonormal basis of Null(J)
};

struct StationarityResidual {
  double dual = 0.0;    // ||g + J^T y||_inf
  double primal = 0.0;  // ||c||_inf
};

inline StationarityResidual stationarity_residual(const Vector& g, const Matrix& J,
                                                  const Vector& y, const Vector& c) {
  if (J.cols() != g.size() || J.rows() != y.size()) {
    throw ContractViolation("stationarity_residual: dimension mismatch");
  }
  return {norm_inf(g + J.transpose() * y), norm_inf(c)};
}

/// Throws LicqFailure when J is numerically rank deficient.
inline void require_full_row_rank(const Matrix& J, double rank_tol = 1e-10) {
  Eigen::JacobiSVD<Matrix> svd(J);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  const double smin = s.size() ? s[s.size() - 1] : 0.0;
  if (s.size() < J.rows() || !(smin > rank_tol * std::max(1.0, smax))) {
    throw LicqFailure("constraint Jacobian is rank deficient (sigma_min = " +
                      std::to_string(smin) + ")");
  }
}

namespace kkt_detail {

struct Factorization {
  Matrix lu;
  std::vector<lapack_int> ipiv;
  Inertia inertia;
  bool ok = false;
};

inline int sign_count(double lambda, double tol, Inertia& in) {
  if (lambda > tol) return ++in.positive;
  if (lambda < -tol) return ++in.negative;
  return ++in.zero;
}

/// Bunch-Kaufman factorization of the lower triangle of K; the inertia is
/// read from the block-diagonal factor (Sylvester's law).
inline Factorization factor(const Matrix& K) {
  Factorization fac;
  const auto dim = static_cast<lapack_int>(K.rows());
  fac.lu = K;
  fac.ipiv.assign(static_cast<std::size_t>(dim), 0);
  const lapack_int info =
      LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', dim, fac.lu.data(), dim, fac.ipiv.data());
  if (info < 0) throw ContractViolation("dsytrf: illegal argument");
  const double tol =
      std::numeric_limits<double>::epsilon() * static_cast<double>(dim) *
      std::max(1.0, K.cwiseAbs().maxCoeff());
  for (lapack_int k = 0; k < dim;) {
    if (fac.ipiv[static_cast<std::size_t>(k)] > 0) {
      sign_count(fac.lu(k, k), tol, fac.inertia);
      k += 1;
    } else {
      const double a = fac.lu(k, k);
      const double b = fac.lu(k + 1, k);
      const double c = fac.lu(k + 1, k + 1);
      const double mid = 0.5 * (a + c);
      const double rad = std::hypot(0.5 * (a - c), b);
      sign_count(mid + rad, tol, fac.inertia);
      sign_count(mid - rad, tol, fac.inertia);
      k += 2;
    }
  }
  fac.ok = info == 0 && fac.inertia.zero == 0;
  return fac;
}

inline Vector back_solve(const Factorization& fac, const Vector& rhs) {
  Vector x = rhs;
  const auto dim = static_cast<lapack_int>(fac.lu.rows());
  const lapack_int info = LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', dim, 1, fac.lu.data(), dim,
                                         fac.ipiv.data(), x.data(), dim);
  if (info != 0) throw ContractViolation("dsytrs failed");
  return x;
}

inline Matrix assemble(const Matrix& H, const Matrix& J, double delta) {
  const Eigen::Index n = H.rows();
  const Eigen::Index m = J.rows();
  Matrix K = Matrix::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = H;
  K.topLeftCorner(n, n).diagonal().array() += delta;
  K.bottomLeftCorner(m, n) = J;
  K.topRightCorner(n, m) = J.transpose();
  return K;
}

}  // namespace kkt_detail

/// Solves [H + delta I, J^T; J, 0] [d; y] = -[g; c] with the smallest delta in
/// {0, delta0, growth*delta0, ...} that gives the matrix inertia (n, m, 0).
inline KktSolution solve_kkt(const Matrix& H, const Matrix& J, const Vector& g,
                             const Vector& c, const InertiaOptions& opts = {}) {
  const Eigen::Index n = H.rows();
  const Eigen::Index m = J.rows();
  if (H.cols() != n || J.cols() != n || g.size() != n || c.size() != m) {
    throw ContractViolation("solve_kkt: dimension mismatch");
  }
  require_full_row_rank(J, opts.rank_tol);

  const double h_norm = H.cwiseAbs().rowwise().sum().maxCoeff();
  const double delta0 = opts.delta0_scale * std::max(1.0, h_norm);
  const Inertia wanted{static_cast<int>(n), static_cast<int>(m), 0};

  Vector rhs(n + m);
  rhs << -g, -c;

  for (double delta = 0.0; delta <= opts.delta_max;
       delta = delta == 0.0 ? delta0 : delta * opts.growth) {
    const Matrix K = kkt_detail::assemble(H, J, delta);
    const auto fac = kkt_detail::factor(K);
    if (!fac.ok || !(fac.inertia == wanted)) continue;

    Vector sol = kkt_detail::back_solve(fac, rhs);
    // one step of iterative refinement
    sol += kkt_detail::back_solve(fac, rhs - K * sol);

    KktSolution out;
    out.d = sol.head(n);
    out.y = sol.tail(m);
    out.inertia_shift = delta;
    out.inertia = fac.inertia;
    const Vector r = K * sol - rhs;
    out.residual_norm = norm_inf(r);
    return out;
  }
  throw IndefiniteKkt("inertia correction exceeded delta_max");
}

namespace kkt_detail {

/// Thin QR of J^T, J^T = Q1 R, with the full Q available.
struct TransposeQr {
  Eigen::HouseholderQR<Matrix> qr;
  Eigen::Index m;

  explicit TransposeQr(const Matrix& J) : qr(J.transpose()), m(J.rows()) {}

  Matrix r() const {
    return qr.matrixQR().topLeftCorner(m, m).template triangularView<Eigen::Upper>();
  }
  Matrix q() const { return qr.householderQ(); }
};

}  // namespace kkt_detail

/// u + v = d with v = -J^T (J J^T)^{-1} c in Range(J^T) and u in Null(J).
inline Decomposition decompose(const Matrix& J, const Vector& d, const Vector& c,
                               double rank_tol = 1e-10) {
  if (J.cols() != d.size() || J.rows() != c.size()) {
    throw ContractViolation("decompose: dimension mismatch");
  }
  require_full_row_rank(J, rank_tol);
  const kkt_detail::TransposeQr f(J);
  const Matrix Q = f.q();
  const Eigen::Index m = J.rows();
  const Eigen::Index n = J.cols();
  // J J^T = R^T R, so v = -Q1 R^{-T} c
  const Matrix R = f.r();
  const Vector w = R.transpose().triangularView<Eigen::Lower>().solve(c);
  Decomposition out;
  out.v = -Q.leftCols(m) * w;
  out.u = d - out.v;
  out.Z = Q.rightCols(n - m);
  return out;
}

/// argmin_y ||g + J^T y||_2.
inline Vector least_squares_multiplier(const Vector& g, const Matrix& J,
                                       double rank_tol = 1e-10) {
  if (J.cols() != g.size()) throw ContractViolation("least_squares_multiplier: dimension mismatch");
  require_full_row_rank(J, rank_tol);
  const kkt_detail::TransposeQr f(J);
  const Vector qtg = f.qr.householderQ().transpose() * g;
  return -f.r().triangularView<Eigen::Upper>().solve(qtg.head(J.rows()));
}

/// ||g + J^T y||_inf with y the least-squares multiplier. Never throws on
/// rank deficiency (minimum-norm solution instead), so it is safe for logging
/// along iterates where LICQ may have degraded.
inline double optimality_error(const Vector& g, const Matrix& J) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(J.transpose());
  const Vector y = cod.solve(-g);
  return norm_inf(g + J.transpose() * y);
}

/// ||J^T (J J^T)^{-1}||_2 = 1 / sigma_min(J).
inline double normal_operator_norm(const Matrix& J) {
  Eigen::JacobiSVD<Matrix> svd(J);
  return 1.0 / svd.singularValues()[svd.singularValues().size() - 1];
}

}  // namespace stosqp
