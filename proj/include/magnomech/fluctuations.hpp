#pragma once

// Linearized quantum fluctuations around the mean field. All 6x6 matrices
// use the quadrature ordering (Ar, Ai, Br, Bi, Mr, Mi); the vacuum variance
// of every quadrature is 1/2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "magnomech/errors.hpp"
#include "magnomech/linalg.hpp"
#include "magnomech/meanfield.hpp"
#include "magnomech/ode.hpp"
#include "magnomech/params.hpp"

namespace magnomech {

enum class Mode : int { cavity = 0, mechanics = 1, magnon = 2 };

namespace quadrature {
inline constexpr double vacuum_variance = 0.5;
inline constexpr int position(Mode m) { return 2 * static_cast<int>(m); }
inline constexpr int momentum(Mode m) { return 2 * static_cast<int>(m) + 1; }
}  // namespace quadrature

struct DriftMatrix {
  Mat6 entries = Mat6::Zero();
  double time = 0.0;
};

struct DiffusionMatrix {
  Mat6 entries = Mat6::Zero();
};

struct CovarianceMatrix {
  Mat6 entries = Mat6::Zero();
  double time = 0.0;
};

/// One-period fundamental matrix and accumulated noise.
struct Monodromy {
  Mat6 phi = Mat6::Identity();
  Mat6 q = Mat6::Zero();
};

inline DriftMatrix drift_matrix(double t, const ModeAmplitudes& mean, const SystemParams& p) {
  const Complex coupling = p.g * mean.a;  // G
  const double gr = coupling.real();
  const double gi = coupling.imag();
  const double detuning = p.delta_a - 2.0 * p.g * mean.b.real();
  const double phase_c = p.omega_c_prime * t - p.theta_c;
  const double phase_m = p.omega_m * t - p.theta_m;
  const double zeta_c = 2.0 * p.xi_c * std::cos(phase_c);
  const double lambda_c = 2.0 * p.xi_c * std::sin(phase_c);
  const double zeta_m = 2.0 * p.xi_m * std::cos(phase_m);
  const double lambda_m = 2.0 * p.xi_m * std::sin(phase_m);
  const double ka = p.kappa_a, gb = p.gamma_b, km = p.kappa_m, wb = p.omega_b;
  const double lam = p.lambda, ds = p.delta_s;

  DriftMatrix a;
  a.time = t;
  // clang-format off
  a.entries <<
      -ka + zeta_c,           detuning - lambda_c,  -2.0 * gi,          0.0,               0.0,  lam,
      -detuning - lambda_c,   -ka - zeta_c,          2.0 * gr,          0.0,              -lam,  0.0,
       0.0,                    0.0,                 -gb + zeta_m,       wb - lambda_m,     0.0,  0.0,
       2.0 * gr,               2.0 * gi,            -wb - lambda_m,    -gb - zeta_m,       0.0,  0.0,
       0.0,                    lam,                  0.0,               0.0,              -km,   ds,
      -lam,                    0.0,                  0.0,               0.0,              -ds,  -km;
  // clang-format on
  return a;
}

inline DiffusionMatrix diffusion_matrix(const SystemParams& p, const ThermalOccupations& occ) {
  DiffusionMatrix d;
  const double da = p.kappa_a * (2.0 * occ.n_a + 1.0);
  const double db = p.gamma_b * (2.0 * occ.n_b + 1.0);
  const double ds = p.kappa_m * (2.0 * occ.n_s + 1.0);
  d.entries.diagonal() << da, da, db, db, ds, ds;
  return d;
}

inline DiffusionMatrix diffusion_matrix(const SystemParams& p) {
  return diffusion_matrix(p, thermal_occupations(p));
}

/// Thermal diagonal diag((2n+1)/2) per mode: the steady state of uncoupled,
/// undriven modes, and the pre-drive initial condition.
inline CovarianceMatrix thermal_covariance(const ThermalOccupations& occ) {
  CovarianceMatrix v;
  v.entries.diagonal() << occ.n_a + 0.5, occ.n_a + 0.5, occ.n_b + 0.5, occ.n_b + 0.5,
      occ.n_s + 0.5, occ.n_s + 0.5;
  return v;
}

/// dV/dt = A V + V A^T + D.
inline Mat6 cm_rhs(const Mat6& v, const Mat6& a, const Mat6& d) {
  return a * v + v * a.transpose() + d;
}

inline Mat6 cm_rhs(const CovarianceMatrix& v, const DriftMatrix& a, const DiffusionMatrix& d) {
  return cm_rhs(v.entries, a.entries, d.entries);
}

struct CovarianceOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  /// Norm growth (relative to the start) treated as divergence.
  double divergence_factor = 1e12;

  ode::Options ode() const {
    ode::Options o;
    o.rtol = rtol;
    o.atol = atol;
    return o;
  }
};

/// Covariance matrices at the sorted instants `times` (all >= t0), starting
/// from V(t0) = v0 and following the mean field `orbit`. The state is the
/// packed upper triangle, so every emitted V is exactly symmetric.
inline std::vector<CovarianceMatrix> integrate_cm(const SystemParams& p, const MeanTrajectory& orbit,
                                                  const CovarianceMatrix& v0, double t0,
                                                  std::span<const double> times,
                                                  const CovarianceOptions& opt = {}) {
  const Mat6 d = diffusion_matrix(p).entries;
  auto rhs = [&](double t, const Packed21& y) {
    const Mat6 a = drift_matrix(t, orbit.at(t), p).entries;
    return linalg::pack(cm_rhs(linalg::unpack(y), a, d));
  };
  const double limit = opt.divergence_factor * (v0.entries.norm() + 1.0);
  std::vector<CovarianceMatrix> out;
  out.reserve(times.size());
  std::size_t next = 0;
  while (next < times.size() && times[next] <= t0) {
    out.push_back({linalg::symmetrize(v0.entries), times[next]});
    ++next;
  }
  if (next == times.size()) return out;
  ode::integrate<21>(rhs, t0, times.back(), linalg::pack(v0.entries), opt.ode(),
                     [&](const ode::DenseStep<21>& s) {
                       const Packed21 end = s.coeffs[0] + s.coeffs[1];
                       if (!end.allFinite() || end.norm() > limit) {
                         throw IntegrationError("integrate_cm: covariance diverges", s.t1());
                       }
                       while (next < times.size() && times[next] <= s.t1()) {
                         out.push_back({linalg::unpack(s(times[next])), times[next]});
                         ++next;
                       }
                     });
  return out;
}

/// Evenly spaced samples over [t0, t1], endpoints included.
inline std::vector<CovarianceMatrix> integrate_cm(const SystemParams& p, const MeanTrajectory& orbit,
                                                  const CovarianceMatrix& v0, double t0, double t1,
                                                  std::size_t n_samples,
                                                  const CovarianceOptions& opt = {}) {
  n_samples = std::max<std::size_t>(n_samples, 2);
  std::vector<double> times(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    times[k] = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(n_samples - 1);
  }
  return integrate_cm(p, orbit, v0, t0, times, opt);
}

/// Jointly integrates dPhi/dt = A Phi, Phi(0) = I and
/// dQ/dt = A Q + Q A^T + D, Q(0) = 0 over [0, tau].
inline Monodromy monodromy(const SystemParams& p, const MeanTrajectory& orbit, double tau,
                           const CovarianceOptions& opt = {}) {
  using State = Eigen::Matrix<double, 57, 1>;
  const Mat6 d = diffusion_matrix(p).entries;
  auto rhs = [&](double t, const State& y) {
    const Mat6 a = drift_matrix(t, orbit.at(t), p).entries;
    State dy;
    Eigen::Map<Mat6>(dy.data()) = a * Eigen::Map<const Mat6>(y.data());
    dy.tail<21>() = linalg::pack(cm_rhs(linalg::unpack(y.tail<21>()), a, d));
    return dy;
  };
  State y0 = State::Zero();
  Eigen::Map<Mat6>(y0.data()) = Mat6::Identity();
  const State y1 = ode::integrate<57>(rhs, 0.0, tau, y0, opt.ode());
  if (!y1.allFinite()) throw IntegrationError("monodromy: non-finite result", tau);
  Monodromy m;
  m.phi = Eigen::Map<const Mat6>(y1.data());
  m.q = linalg::unpack(y1.tail<21>());
  return m;
}

inline double floquet_spectral_radius(const Monodromy& m) { return linalg::spectral_radius(m.phi); }

inline bool stability_floquet(const Monodromy& m) {
  return floquet_spectral_radius(m) < 1.0 - 1e-9;
}

/// Largest real part among the eigenvalues of A.
inline double max_real_eigenvalue(const DriftMatrix& a) {
  return linalg::spectral_abscissa(a.entries);
}

/// Routh-Hurwitz condition evaluated through the eigenvalues.
inline bool stability_instantaneous(const DriftMatrix& a) { return max_real_eigenvalue(a) < 0.0; }

/// Smallest eigenvalue of the Hermitian matrix V + (i/2) Omega.
inline double uncertainty_margin(const Eigen::MatrixXd& v) {
  const auto n = v.rows();
  const Eigen::MatrixXd omega = linalg::symplectic_form(static_cast<int>(n / 2));
  const Eigen::MatrixXcd h =
      v.cast<Complex>() + Complex(0.0, 0.5) * omega.cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool physicality_check(const CovarianceMatrix& v) {
  return uncertainty_margin(v.entries) >= -1e-9;
}

/// Steady covariance of the autonomous system: A V + V A^T + D = 0.
inline CovarianceMatrix stationary_cm(const SystemParams& p, const ModeAmplitudes& mean) {
  const DriftMatrix a = drift_matrix(0.0, mean, p);
  if (!stability_instantaneous(a)) {
    throw InstabilityError("stationary_cm: drift matrix has an eigenvalue with Re >= 0",
                           max_real_eigenvalue(a));
  }
  CovarianceMatrix v;
  v.entries = linalg::solve_lyapunov(a.entries, diffusion_matrix(p).entries);
  return v;
}

/// Periodic steady state over one period: V0 solves V0 = Phi V0 Phi^T + Q,
/// then one period is integrated and sampled at t_k = k tau / n_samples.
inline std::vector<CovarianceMatrix> periodic_steady_cm(const SystemParams& p,
                                                        const MeanTrajectory& orbit, double tau,
                                                        const Monodromy& m, std::size_t n_samples,
                                                        const CovarianceOptions& opt = {}) {
  const double rho = floquet_spectral_radius(m);
  if (!(rho < 1.0)) {
    throw InstabilityError("periodic_steady_cm: Floquet spectral radius " + std::to_string(rho) +
                               " >= 1, no steady state",
                           rho);
  }
  CovarianceMatrix v0;
  v0.entries = linalg::solve_stein(m.phi, m.q);
  n_samples = std::max<std::size_t>(n_samples, 1);
  std::vector<double> times(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    times[k] = tau * static_cast<double>(k) / static_cast<double>(n_samples);
  }
  return integrate_cm(p, orbit, v0, 0.0, times, opt);
}

inline std::vector<CovarianceMatrix> periodic_steady_cm(const SystemParams& p,
                                                        const MeanTrajectory& orbit, double tau,
                                                        std::size_t n_samples,
                                                        const CovarianceOptions& opt = {}) {
  return periodic_steady_cm(p, orbit, tau, monodromy(p, orbit, tau, opt), n_samples, opt);
}

/// Steady covariance for any configuration: a single stationary sample for
/// a constant mean field, one sampled period otherwise.
inline std::vector<CovarianceMatrix> steady_cm(const SystemParams& p, const MeanTrajectory& orbit,
                                               std::size_t n_samples,
                                               const CovarianceOptions& opt = {}) {
  if (orbit.constant() || !orbit.period) return {stationary_cm(p, orbit.states.front())};
  return periodic_steady_cm(p, orbit, *orbit.period, n_samples, opt);
}

struct StabilityReport {
  /// Worst (largest) eigenvalue real part of A(t) over the sampled phases.
  double max_real_eigenvalue = 0.0;
  bool routh_hurwitz = false;
  /// Spectral radius of the one-period fundamental matrix (autonomous
  /// systems report exp(max_real_eigenvalue) per unit time).
  double spectral_radius = 0.0;
  bool floquet = false;
  /// Present for periodic orbits.
  std::optional<Monodromy> monodromy;

  bool stable() const { return routh_hurwitz && floquet; }
  /// A periodic steady state exists iff the Floquet criterion holds.
  bool steady_state_exists() const { return floquet; }
};

inline StabilityReport assess_stability(const SystemParams& p, const MeanTrajectory& orbit,
                                        std::size_t n_phases = 64,
                                        const CovarianceOptions& opt = {}) {
  StabilityReport r;
  r.max_real_eigenvalue = -std::numeric_limits<double>::infinity();
  if (orbit.constant() || !orbit.period) {
    r.max_real_eigenvalue = max_real_eigenvalue(drift_matrix(0.0, orbit.states.front(), p));
    r.routh_hurwitz = r.max_real_eigenvalue < 0.0;
    r.spectral_radius = std::exp(r.max_real_eigenvalue);
    r.floquet = r.spectral_radius < 1.0 - 1e-9;
    return r;
  }
  const double tau = *orbit.period;
  for (std::size_t k = 0; k < n_phases; ++k) {
    const double t = tau * static_cast<double>(k) / static_cast<double>(n_phases);
    r.max_real_eigenvalue =
        std::max(r.max_real_eigenvalue, max_real_eigenvalue(drift_matrix(t, orbit.at(t), p)));
  }
  r.routh_hurwitz = r.max_real_eigenvalue < 0.0;
  r.monodromy = monodromy(p, orbit, tau, opt);
  r.spectral_radius = floquet_spectral_radius(*r.monodromy);
  r.floquet = stability_floquet(*r.monodromy);
  return r;
}

}  // namespace magnomech
