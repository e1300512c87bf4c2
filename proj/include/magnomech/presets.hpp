#pragma once

// Reference parameter sets used by the shipped configs, the examples in the
// README and the acceptance suite. All values in units of omega_b.

#include "magnomech/params.hpp"

namespace magnomech::presets {

/// Drive amplitude for the entanglement studies. Chosen so that the undriven
/// minimum residual contangle at delta_a = 0.73 is about 0.028.
inline constexpr double kEntanglementDrive = 4.5e4;

/// Common settings of the entanglement studies, drives off.
inline SystemParams entanglement_base() {
  SystemParams p;
  p.delta_a = 0.73;
  p.delta_s = -1.0;
  p.g = 5e-6;
  p.lambda = 0.5;
  p.kappa_a = 0.2;
  p.kappa_m = 0.2;
  p.gamma_b = 1e-5;
  p.epsilon_d = kEntanglementDrive;
  p.temperature = 0.01;
  p.theta_c = 0.0;
  p.theta_m = 0.0;
  return p;
}

/// Optical parametric drive only, at the strongest studied amplitude.
inline SystemParams opa_only() {
  SystemParams p = entanglement_base();
  p.xi_c = 0.1;
  p.omega_c_prime = 1.0;
  return p;
}

/// Mechanical parametric drive only.
inline SystemParams mpa_only() {
  SystemParams p = entanglement_base();
  p.delta_a = 0.81;
  p.xi_m = 0.1;
  p.omega_m = 1.8;
  return p;
}

/// Both drives at full amplitude, optical at omega_b and mechanical at 1.8 omega_b.
inline SystemParams dual_strong() {
  SystemParams p = entanglement_base();
  p.xi_c = 0.1;
  p.xi_m = 0.1;
  p.omega_c_prime = 1.0;
  p.omega_m = 1.8;
  return p;
}

/// Both drives at half amplitude and equal frequency 1.2 omega_b.
inline SystemParams dual_matched() {
  SystemParams p = entanglement_base();
  p.xi_c = 0.05;
  p.xi_m = 0.05;
  p.omega_c_prime = 1.2;
  p.omega_m = 1.2;
  return p;
}

/// Mean-field demonstration: weak optical drive at 1.2 omega_b, T = 0.
inline SystemParams meanfield_demo() {
  SystemParams p;
  p.delta_a = 1.0;
  p.delta_s = -1.0;
  p.epsilon_d = 6e4;
  p.xi_c = 0.01;
  p.omega_c_prime = 1.2;
  p.temperature = 0.0;
  return p;
}

}  // namespace magnomech::presets
