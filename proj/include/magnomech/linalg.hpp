#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "magnomech/errors.hpp"

namespace magnomech {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Packed21 = Eigen::Matrix<double, 21, 1>;

namespace linalg {

/// Direct sum of n blocks [[0, 1], [-1, 0]].
inline Eigen::MatrixXd symplectic_form(int n_modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

/// Upper triangle of a symmetric 6x6 matrix, row-major.
inline Packed21 pack(const Mat6& m) {
  Packed21 v;
  int k = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) v[k++] = m(i, j);
  return v;
}

inline Mat6 unpack(const Packed21& v) {
  Mat6 m;
  int k = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) {
      m(i, j) = v[k];
      m(j, i) = v[k];
      ++k;
    }
  return m;
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

inline double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double spectral_abscissa(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().real().maxCoeff();
}

/// Solves A X + X A^T + D = 0 through the Kronecker form
/// (I (x) A + A (x) I) vec(X) = -vec(D).
inline Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& d) {
  const auto n = a.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) = a(i, j) * id + (i == j ? a : Eigen::MatrixXd::Zero(n, n));
    }
  // Column-major vec: vec(A X) = (I (x) A) vec X, vec(X A^T) = (A (x) I) vec X.
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(d.data(), n * n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kron);
  if (!lu.isInvertible()) {
    throw DomainError("solve_lyapunov: A and -A share an eigenvalue");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  return symmetrize(Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n));
}

/// Solves X = Phi X Phi^T + Q by squaring:
///   X_{k+1} = X_k + Phi_k X_k Phi_k^T,  Phi_{k+1} = Phi_k^2,  X_0 = Q.
/// Requires spectral radius of Phi < 1.
inline Eigen::MatrixXd solve_stein(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& q,
                                   double tol = 1e-12, int max_doublings = 200) {
  const double rho = spectral_radius(phi);
  if (!(rho < 1.0)) throw InstabilityError("solve_stein: spectral radius >= 1", rho);
  Eigen::MatrixXd x = q;
  Eigen::MatrixXd p = phi;
  for (int k = 0; k < max_doublings; ++k) {
    const Eigen::MatrixXd inc = p * x * p.transpose();
    x += inc;
    p = p * p;
    if (inc.norm() <= tol * x.norm()) return symmetrize(x);
    if (!x.allFinite()) break;
  }
  throw InstabilityError("solve_stein: iteration did not converge", spectral_radius(phi));
}

}  // namespace linalg
}  // namespace magnomech
