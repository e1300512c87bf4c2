#pragma once

// Classical mean-value dynamics of the three modes: right-hand side,
// static fixed point, transient integration and the periodic orbit reached
// under parametric driving.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "magnomech/errors.hpp"
#include "magnomech/linalg.hpp"
#include "magnomech/ode.hpp"
#include "magnomech/params.hpp"

namespace magnomech {

/// Mean values sampled over a transient window or one period of an orbit.
/// Between samples the trajectory is evaluated from the integrator's dense
/// output; when `period` is set, `at` extends it periodically.
struct MeanTrajectory {
  std::vector<double> times;
  std::vector<ModeAmplitudes> states;
  std::optional<double> period;
  std::shared_ptr<const ode::DenseSolution<6>> dense;

  bool constant() const { return dense == nullptr; }

  ModeAmplitudes at(double t) const {
    if (!dense) return states.front();
    double s = t;
    if (period) {
      const double t0 = dense->t_begin();
      s = t0 + std::fmod(t - t0, *period);
      if (s < t0) s += *period;
    }
    return ModeAmplitudes::unflatten((*dense)(s));
  }

  double max_abs_a() const {
    double best = 0.0;
    for (const auto& s : states) best = std::max(best, std::abs(s.a));
    return best;
  }

  double min_abs_a() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : states) best = std::min(best, std::abs(s.a));
    return best;
  }
};

/// Time derivatives of <a>, <b>, <m>.
inline ModeAmplitudes meanfield_rhs(const ModeAmplitudes& s, double t, const SystemParams& p) {
  const Complex i(0.0, 1.0);
  const Complex opa = 2.0 * p.xi_c * std::polar(1.0, -(p.omega_c_prime * t - p.theta_c));
  const Complex mpa = 2.0 * p.xi_m * std::polar(1.0, -(p.omega_m * t - p.theta_m));
  const double b_quad = 2.0 * s.b.real();  // <b> + <b>*
  ModeAmplitudes d;
  d.a = -(p.kappa_a + i * p.delta_a) * s.a + i * p.g * s.a * b_quad - i * p.lambda * s.m +
        opa * std::conj(s.a) + p.epsilon_d;
  d.b = -(p.gamma_b + i * p.omega_b) * s.b + mpa * std::conj(s.b) + i * p.g * std::norm(s.a);
  d.m = -(p.kappa_m + i * p.delta_s) * s.m - i * p.lambda * s.a;
  return d;
}

/// Real 6x6 Jacobian of meanfield_rhs in the flattened coordinates, built
/// from the Wirtinger derivatives dF/dw and dF/dw* of each component.
inline Mat6 meanfield_jacobian(const ModeAmplitudes& s, double t, const SystemParams& p) {
  const Complex i(0.0, 1.0);
  const Complex opa = 2.0 * p.xi_c * std::polar(1.0, -(p.omega_c_prime * t - p.theta_c));
  const Complex mpa = 2.0 * p.xi_m * std::polar(1.0, -(p.omega_m * t - p.theta_m));
  const double b_quad = 2.0 * s.b.real();

  // dF[row]/dw[col] and dF[row]/dw*[col], rows/cols ordered (a, b, m).
  Complex dw[3][3] = {};
  Complex dwc[3][3] = {};
  dw[0][0] = -(p.kappa_a + i * p.delta_a) + i * p.g * b_quad;
  dwc[0][0] = opa;
  dw[0][1] = i * p.g * s.a;
  dwc[0][1] = i * p.g * s.a;
  dw[0][2] = -i * p.lambda;
  dw[1][0] = i * p.g * std::conj(s.a);
  dwc[1][0] = i * p.g * s.a;
  dw[1][1] = -(p.gamma_b + i * p.omega_b);
  dwc[1][1] = mpa;
  dw[2][0] = -i * p.lambda;
  dw[2][2] = -(p.kappa_m + i * p.delta_s);

  Mat6 jac;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const Complex d_re = dw[r][c] + dwc[r][c];
      const Complex d_im = i * (dw[r][c] - dwc[r][c]);
      jac(2 * r, 2 * c) = d_re.real();
      jac(2 * r, 2 * c + 1) = d_im.real();
      jac(2 * r + 1, 2 * c) = d_re.imag();
      jac(2 * r + 1, 2 * c + 1) = d_im.imag();
    }
  return jac;
}

namespace detail {

inline double rhs_norm(const ModeAmplitudes& s, const SystemParams& p) {
  return meanfield_rhs(s, 0.0, p).flatten().norm();
}

inline SystemParams without_parametric_drives(SystemParams p) {
  p.xi_c = 0.0;
  p.xi_m = 0.0;
  return p;
}

inline ModeAmplitudes slave_modes(Complex a, const SystemParams& p) {
  const Complex i(0.0, 1.0);
  const Complex b = i * p.g * std::norm(a) / (p.gamma_b + i * p.omega_b);
  const Complex m = -i * p.lambda * a / (p.kappa_m + i * p.delta_s);
  return {a, b, m};
}

}  // namespace detail

struct FixedPointOptions {
  int max_newton = 50;
  /// Convergence target on |rhs|, relative to (epsilon_d + omega_b).
  double residual_tol = 1e-10;
};

namespace detail {

/// Positive roots, ascending, of the intracavity photon-number cubic
///   chi^2 n^3 - 2 y chi n^2 + (x^2 + y^2) n - eps_d^2 = 0,
/// where x + i y = kappa_a + i delta_a + lambda^2 / (kappa_m + i delta_s) and
/// chi = 2 g^2 omega_b / (gamma_b^2 + omega_b^2).
inline std::vector<double> photon_number_roots(const SystemParams& p) {
  const Complex i(0.0, 1.0);
  const Complex k = p.kappa_a + i * p.delta_a + p.lambda * p.lambda / (p.kappa_m + i * p.delta_s);
  const double x = k.real();
  const double y = k.imag();
  const double chi = 2.0 * p.g * p.g * p.omega_b / (p.gamma_b * p.gamma_b + p.omega_b * p.omega_b);
  const double e2 = p.epsilon_d * p.epsilon_d;
  if (chi == 0.0) return {e2 / (x * x + y * y)};
  // Companion matrix of the monic cubic n^3 + c2 n^2 + c1 n + c0.
  const double c2 = -2.0 * y / chi;
  const double c1 = (x * x + y * y) / (chi * chi);
  const double c0 = -e2 / (chi * chi);
  Eigen::Matrix3d companion;
  companion << -c2, -c1, -c0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
  const Eigen::Vector3cd ev = companion.eigenvalues();
  std::vector<double> roots;
  for (const Complex& r : ev) {
    if (!(r.real() > 0.0 && std::abs(r.imag()) <= 1e-6 * std::abs(r))) continue;
    double n = r.real();
    for (int it = 0; it < 8; ++it) {
      const double f = ((n + c2) * n + c1) * n + c0;
      const double df = (3.0 * n + 2.0 * c2) * n + c1;
      if (df == 0.0) break;
      const double step = f / df;
      n -= step;
      if (std::abs(step) <= 1e-15 * n) break;
    }
    roots.push_back(n);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace detail

/// Static root of the mean-value equations with the parametric drives
/// switched off. The photon number is taken from the lowest positive root of
/// the reduced cubic (the branch reached by ramping the drive up from zero),
/// then all six components are polished by Newton on the full system.
inline ModeAmplitudes find_fixed_point(const SystemParams& p_in, const FixedPointOptions& opt = {}) {
  const SystemParams p = detail::without_parametric_drives(p_in);
  const Complex i(0.0, 1.0);
  const double target = opt.residual_tol * (p.epsilon_d + p.omega_b);
  if (p.epsilon_d == 0.0) return {};

  const std::vector<double> roots = detail::photon_number_roots(p);
  if (roots.empty()) {
    throw RootFindError("find_fixed_point: photon-number cubic has no positive root",
                        std::numeric_limits<double>::infinity());
  }
  const Complex k = p.kappa_a + i * p.delta_a + p.lambda * p.lambda / (p.kappa_m + i * p.delta_s);
  const double chi = 2.0 * p.g * p.g * p.omega_b / (p.gamma_b * p.gamma_b + p.omega_b * p.omega_b);
  const Complex a = p.epsilon_d / (k - i * chi * roots.front());

  ModeAmplitudes s = detail::slave_modes(a, p);
  double residual = detail::rhs_norm(s, p);
  for (int it = 0; it < opt.max_newton && !(residual <= 0.01 * target); ++it) {
    const Vec6 f = meanfield_rhs(s, 0.0, p).flatten();
    const Mat6 jac = meanfield_jacobian(s, 0.0, p);
    const Vec6 dx = jac.fullPivLu().solve(-f);
    double lambda_ls = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const ModeAmplitudes trial = ModeAmplitudes::unflatten(s.flatten() + lambda_ls * dx);
      const double r = detail::rhs_norm(trial, p);
      if (r < residual) {
        s = trial;
        residual = r;
        improved = true;
        break;
      }
      lambda_ls *= 0.5;
    }
    if (!improved) break;
  }
  if (!(residual <= target) || !s.finite()) {
    throw RootFindError("find_fixed_point: no convergence", residual);
  }
  return s;
}

struct IntegrationOptions {
  double rtol = 1e-9;
  /// Absolute tolerance in units of max(epsilon_d, 1).
  double atol_scale = 1e-9;

  ode::Options ode(const SystemParams& p) const {
    ode::Options o;
    o.rtol = rtol;
    o.atol = atol_scale * std::max(p.epsilon_d, 1.0);
    o.max_steps = 2'000'000;
    return o;
  }
};

/// Integrates the mean-value equations over [t0, t1] and samples
/// `n_samples` evenly spaced instants (endpoints included).
inline MeanTrajectory integrate_meanfield(const SystemParams& p, double t0, double t1,
                                          const ModeAmplitudes& initial, std::size_t n_samples,
                                          const IntegrationOptions& opt = {}) {
  if (!(opt.rtol > 0.0) || !(opt.atol_scale > 0.0)) {
    throw DomainError("integrate_meanfield: tolerances must be positive");
  }
  if (!(t1 > t0)) throw DomainError("integrate_meanfield: empty time window");
  n_samples = std::max<std::size_t>(n_samples, 2);
  auto rhs = [&p](double t, const Vec6& y) {
    return meanfield_rhs(ModeAmplitudes::unflatten(y), t, p).flatten();
  };
  auto dense = std::make_shared<ode::DenseSolution<6>>(
      ode::solve_dense<6>(rhs, t0, t1, initial.flatten(), opt.ode(p)));
  MeanTrajectory traj;
  traj.dense = dense;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(n_samples - 1);
    traj.times.push_back(t);
    traj.states.push_back(ModeAmplitudes::unflatten((*dense)(t)));
  }
  return traj;
}

/// Flow of the mean-value equations over [t0, t0 + duration].
inline ModeAmplitudes propagate_meanfield(const SystemParams& p, double t0, double duration,
                                          const ModeAmplitudes& initial,
                                          const IntegrationOptions& opt = {}) {
  auto rhs = [&p](double t, const Vec6& y) {
    return meanfield_rhs(ModeAmplitudes::unflatten(y), t, p).flatten();
  };
  return ModeAmplitudes::unflatten(
      ode::integrate<6>(rhs, t0, t0 + duration, initial.flatten(), opt.ode(p)));
}

struct PeriodMapResult {
  Vec6 end;
  Mat6 jacobian;  // d(end)/d(start)
};

/// Period map x -> Phi_tau(x) together with its Jacobian from the
/// variational equations.
inline PeriodMapResult period_map(const SystemParams& p, double tau, const Vec6& start,
                                  const IntegrationOptions& opt) {
  using State = Eigen::Matrix<double, 42, 1>;
  auto rhs = [&p](double t, const State& y) {
    const ModeAmplitudes s = ModeAmplitudes::unflatten(y.head<6>());
    State dy;
    dy.head<6>() = meanfield_rhs(s, t, p).flatten();
    const Mat6 jac = meanfield_jacobian(s, t, p);
    Eigen::Map<Mat6>(dy.data() + 6) = jac * Eigen::Map<const Mat6>(y.data() + 6);
    return dy;
  };
  State y0;
  y0.head<6>() = start;
  Eigen::Map<Mat6>(y0.data() + 6) = Mat6::Identity();
  ode::Options o = opt.ode(p);
  const State y1 = ode::integrate<42>(rhs, 0.0, tau, y0, o);
  return {y1.head<6>(), Eigen::Map<const Mat6>(y1.data() + 6)};
}

struct OrbitOptions {
  /// Convergence: |x(tau) - x(0)| <= tol |x(0)|.
  double tol = 1e-9;
  IntegrationOptions integration{1e-11, 1e-11};
  int transient_periods = 20;
  int max_newton = 40;
  /// Periods of direct integration attempted if Newton stalls.
  int fallback_periods = 20'000;
  /// The fallback gives up when the stroboscopic residual has not halved
  /// within this many periods (quasi-periodic or chaotic motion).
  int fallback_patience = 500;
  /// Escape bound, relative to max(|fixed point|, epsilon_d / kappa_a).
  double divergence_factor = 1e3;
  std::size_t n_samples = 256;
};

/// One period of the attracting limit cycle, starting at t = 0.
inline MeanTrajectory find_periodic_orbit(const SystemParams& p, double tau,
                                          const OrbitOptions& opt = {}) {
  if (!(tau > 0.0)) throw DomainError("find_periodic_orbit: period must be positive");
  const auto& iopt = opt.integration;
  Vec6 x = find_fixed_point(p).flatten();
  const double bound = opt.divergence_factor * std::max(x.norm(), p.epsilon_d / p.kappa_a + 1.0);
  auto advance = [&](const Vec6& y) {
    Vec6 next;
    try {
      next = propagate_meanfield(p, 0.0, tau, ModeAmplitudes::unflatten(y), iopt).flatten();
    } catch (const IntegrationError&) {
      next.setConstant(std::numeric_limits<double>::infinity());
    }
    if (!next.allFinite() || next.norm() > bound) {
      throw InstabilityError("find_periodic_orbit: mean field diverges",
                             std::numeric_limits<double>::infinity());
    }
    return next;
  };
  for (int k = 0; k < opt.transient_periods; ++k) x = advance(x);

  bool converged = false;
  Mat6 monodromy = Mat6::Identity();
  PeriodMapResult pm = period_map(p, tau, x, iopt);
  double residual = (pm.end - x).norm();
  for (int it = 0; it < opt.max_newton; ++it) {
    monodromy = pm.jacobian;
    if (residual <= opt.tol * x.norm()) {
      converged = true;
      break;
    }
    const Mat6 jac = pm.jacobian - Mat6::Identity();
    const Vec6 dx = jac.fullPivLu().solve(-(pm.end - x));
    double step = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 10; ++ls) {
      const Vec6 trial = x + step * dx;
      PeriodMapResult trial_pm;
      double r = std::numeric_limits<double>::infinity();
      try {
        trial_pm = period_map(p, tau, trial, iopt);
        r = (trial_pm.end - trial).norm();
      } catch (const IntegrationError&) {
      }
      if (std::isfinite(r) && r < 0.9 * residual) {
        x = trial;
        pm = trial_pm;
        residual = r;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }

  if (!converged) {
    // Direct long-time integration, one period at a time.
    double best = std::numeric_limits<double>::infinity();
    int best_at = 0;
    for (int k = 0; k < opt.fallback_periods; ++k) {
      const Vec6 next = advance(x);
      const double r = (next - x).norm();
      x = next;
      if (r <= opt.tol * x.norm()) {
        converged = true;
        monodromy = period_map(p, tau, x, iopt).jacobian;
        break;
      }
      if (r < 0.5 * best) {
        best = r;
        best_at = k;
      } else if (k - best_at > opt.fallback_patience) {
        break;
      }
    }
  }
  if (!converged) {
    throw LimitCycleError("find_periodic_orbit: no convergence to a periodic orbit");
  }

  const double rho = linalg::spectral_radius(monodromy);
  if (rho >= 1.0) {
    throw InstabilityError("find_periodic_orbit: orbit is unstable (Floquet multiplier " +
                               std::to_string(rho) + ")",
                           rho);
  }

  auto rhs = [&p](double t, const Vec6& y) {
    return meanfield_rhs(ModeAmplitudes::unflatten(y), t, p).flatten();
  };
  auto dense =
      std::make_shared<ode::DenseSolution<6>>(ode::solve_dense<6>(rhs, 0.0, tau, x, iopt.ode(p)));
  MeanTrajectory orbit;
  orbit.period = tau;
  orbit.dense = dense;
  const std::size_t n = std::max<std::size_t>(opt.n_samples, 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = tau * static_cast<double>(k) / static_cast<double>(n);
    orbit.times.push_back(t);
    orbit.states.push_back(ModeAmplitudes::unflatten((*dense)(t)));
  }
  return orbit;
}

/// Constant trajectory at a fixed point (autonomous system).
inline MeanTrajectory constant_trajectory(const ModeAmplitudes& state) {
  MeanTrajectory traj;
  traj.times = {0.0};
  traj.states = {state};
  return traj;
}

/// Long-time mean field: the fixed point when no parametric drive is on,
/// otherwise the periodic orbit over the common drive period.
inline MeanTrajectory steady_meanfield(const SystemParams& p, const OrbitOptions& opt = {}) {
  if (p.autonomous()) return constant_trajectory(find_fixed_point(p));
  return find_periodic_orbit(p, common_period(p), opt);
}

}  // namespace magnomech
