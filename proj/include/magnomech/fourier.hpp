#pragma once

// First-order harmonic approximation of the long-time cavity amplitude under
// optical parametric driving alone:
//
//   <a(t)> ~ a0 + eps_s exp(-i w t) a_plus + conj(eps_s) exp(i w t) a_minus,
//
// with w = omega_c_prime and eps_s = 2 xi_c epsilon_d. Balancing the
// exp(-i w t) and exp(+i w t) components of the mean-value equations
// (magnon and mechanical sidebands eliminated) gives the coupled pair
//
//   P+ a_plus  + C+ conj(a_minus) = 2 xi_c conj(a0) exp(i theta_c) / eps_s
//   P- a_minus + C- conj(a_plus)  = 0
//
// where, with the pole denominators
//   A = kappa_a + i(delta_a - w),  B = gamma_b + i(omega_b - w),
//   C = kappa_m + i(delta_s - w),  D = kappa_a + i(delta_a + w),
//   E = gamma_b + i(omega_b + w),  F = kappa_m + i(delta_s + w),
//
//   P+ = A - i g (b0 + b0*) + g^2 |a0|^2 (1/B - 1/E*) + lambda^2 / C
//   P- = D - i g (b0 + b0*) + g^2 |a0|^2 (1/E - 1/B*) + lambda^2 / F
//   C+ = g^2 a0^2 (1/B - 1/E*),   C- = g^2 a0^2 (1/E - 1/B*).

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "magnomech/errors.hpp"
#include "magnomech/meanfield.hpp"
#include "magnomech/params.hpp"

namespace magnomech {

struct FourierCoefficients {
  Complex a0{};
  Complex b0{};
  Complex m0{};
  Complex a_plus{};
  Complex a_minus{};
  Complex epsilon_s{};
};

struct PoleDenominators {
  Complex A, B, C, D, E, F;
};

inline PoleDenominators pole_denominators(const SystemParams& p) {
  const Complex i(0.0, 1.0);
  const double w = p.omega_c_prime;
  return {p.kappa_a + i * (p.delta_a - w), p.gamma_b + i * (p.omega_b - w),
          p.kappa_m + i * (p.delta_s - w), p.kappa_a + i * (p.delta_a + w),
          p.gamma_b + i * (p.omega_b + w), p.kappa_m + i * (p.delta_s + w)};
}

/// Zeroth- and first-order coefficients. Requires xi_m == 0.
inline FourierCoefficients analytic_coefficients(const SystemParams& p,
                                                 double pole_tol = 1e-12) {
  if (p.xi_m != 0.0) {
    throw DomainError("analytic_coefficients: only valid with the mechanical drive off");
  }
  const Complex i(0.0, 1.0);
  const ModeAmplitudes zeroth = find_fixed_point(p);
  FourierCoefficients c;
  c.a0 = zeroth.a;
  c.b0 = zeroth.b;
  c.m0 = zeroth.m;
  c.epsilon_s = 2.0 * p.xi_c * p.epsilon_d;

  const PoleDenominators den = pole_denominators(p);
  const std::array<std::pair<const char*, Complex>, 6> named = {
      {{"A", den.A}, {"B", den.B}, {"C", den.C}, {"D", den.D}, {"E", den.E}, {"F", den.F}}};
  for (const auto& [name, value] : named) {
    if (std::abs(value) <= pole_tol * (1.0 + p.omega_b)) {
      throw SingularityError("analytic_coefficients: resonant pole", name);
    }
  }
  if (c.epsilon_s == Complex(0.0)) return c;

  const double g2 = p.g * p.g;
  const double a0_sq_abs = std::norm(c.a0);
  const Complex a0_sq = c.a0 * c.a0;
  const Complex shift = -i * p.g * 2.0 * c.b0.real();
  const Complex lower = 1.0 / den.B - 1.0 / std::conj(den.E);
  const Complex upper = 1.0 / den.E - 1.0 / std::conj(den.B);
  const Complex p_plus = den.A + shift + g2 * a0_sq_abs * lower + p.lambda * p.lambda / den.C;
  const Complex p_minus = den.D + shift + g2 * a0_sq_abs * upper + p.lambda * p.lambda / den.F;
  const Complex c_plus = g2 * a0_sq * lower;
  const Complex c_minus = g2 * a0_sq * upper;

  // conj(a_minus) = -conj(C-) a_plus / conj(P-)
  const Complex effective = p_plus - c_plus * std::conj(c_minus) / std::conj(p_minus);
  if (std::abs(effective) == 0.0 || std::abs(p_minus) == 0.0) {
    throw SingularityError("analytic_coefficients: degenerate first-order system", "P");
  }
  const Complex source = 2.0 * p.xi_c * std::conj(c.a0) * std::polar(1.0, p.theta_c) / c.epsilon_s;
  c.a_plus = source / effective;
  c.a_minus = -c_minus * std::conj(c.a_plus) / p_minus;
  return c;
}

inline Complex analytic_cavity_amplitude(double t, const FourierCoefficients& c,
                                         double omega_c_prime) {
  return c.a0 + c.epsilon_s * std::polar(1.0, -omega_c_prime * t) * c.a_plus +
         std::conj(c.epsilon_s) * std::polar(1.0, omega_c_prime * t) * c.a_minus;
}

}  // namespace magnomech
