#pragma once

// Physical parameters, unit conventions and derived quantities of the
// hybrid cavity / magnon / mechanics system.
//
// Unit system: every rate, detuning and frequency inside SystemParams is
// expressed in units of the mechanical frequency, so omega_b == 1 for all
// physical configurations. The SI value of the unit is carried in
// omega_b_si and is needed only to convert to and from SI and to evaluate
// thermal occupations.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "magnomech/errors.hpp"

namespace magnomech {

using Complex = std::complex<double>;

namespace constants {
/// CODATA 2018 exact values.
inline constexpr double hbar = 1.054571817e-34;   // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J / K
}  // namespace constants

struct SystemParams {
  // SI anchors (rad/s). omega_b_si is the internal frequency unit.
  double omega_b_si = 2.0 * std::numbers::pi * 10.0e6;
  double omega_d_si = 2.0 * std::numbers::pi * 10.0e9;
  // Absolute cavity / magnon / optical-pump frequencies. When absent they
  // follow from omega_d_si and the detunings.
  std::optional<double> omega_a_si;
  std::optional<double> omega_s_si;
  std::optional<double> omega_c_si;

  // Scaled quantities (units of omega_b).
  double omega_b = 1.0;
  double delta_a = 1.0;
  double delta_s = -1.0;
  double omega_c_prime = 1.0;
  double omega_m = 1.0;
  double g = 5e-6;
  double lambda = 0.5;
  double kappa_a = 0.2;
  double kappa_m = 0.2;
  double gamma_b = 1e-5;
  double xi_c = 0.0;
  double xi_m = 0.0;
  double theta_c = 0.0;  // rad
  double theta_m = 0.0;  // rad
  double epsilon_d = 6e4;

  double temperature = 0.0;  // K

  double delta_theta() const { return theta_c - theta_m; }
  bool opa_active() const { return xi_c > 0.0; }
  bool mpa_active() const { return xi_m > 0.0; }
  bool autonomous() const { return !opa_active() && !mpa_active(); }

  /// Absolute frequencies in rad/s, derived where not given explicitly.
  double omega_a_abs() const { return omega_a_si.value_or(omega_d_si + delta_a * omega_b_si); }
  double omega_s_abs() const { return omega_s_si.value_or(omega_d_si + delta_s * omega_b_si); }
  double omega_b_abs() const { return omega_b * omega_b_si; }
};

struct ThermalOccupations {
  double n_a = 0.0;
  double n_b = 0.0;
  double n_s = 0.0;
};

/// Complex mean values <a>, <b>, <m> at one instant.
struct ModeAmplitudes {
  Complex a{};
  Complex b{};
  Complex m{};

  using Real6 = Eigen::Matrix<double, 6, 1>;

  /// Flattened as (Re a, Im a, Re b, Im b, Re m, Im m).
  Real6 flatten() const {
    Real6 x;
    x << a.real(), a.imag(), b.real(), b.imag(), m.real(), m.imag();
    return x;
  }

  static ModeAmplitudes unflatten(const Real6& x) {
    return {Complex(x[0], x[1]), Complex(x[2], x[3]), Complex(x[4], x[5])};
  }

  bool finite() const {
    return std::isfinite(a.real()) && std::isfinite(a.imag()) && std::isfinite(b.real()) &&
           std::isfinite(b.imag()) && std::isfinite(m.real()) && std::isfinite(m.imag());
  }

  friend ModeAmplitudes operator+(const ModeAmplitudes& x, const ModeAmplitudes& y) {
    return {x.a + y.a, x.b + y.b, x.m + y.m};
  }
  friend ModeAmplitudes operator-(const ModeAmplitudes& x, const ModeAmplitudes& y) {
    return {x.a - y.a, x.b - y.b, x.m - y.m};
  }
  friend ModeAmplitudes operator*(double s, const ModeAmplitudes& x) {
    return {s * x.a, s * x.b, s * x.m};
  }
};

/// Mean thermal occupation 1/(exp(hbar w / kB T) - 1) of a bosonic mode.
/// `omega` in rad/s, `temperature` in K.
inline double thermal_occupation(double omega, double temperature) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw DomainError("thermal_occupation: frequency must be positive, got " +
                      std::to_string(omega));
  }
  if (!(temperature >= 0.0)) {
    throw DomainError("thermal_occupation: temperature must be >= 0, got " +
                      std::to_string(temperature));
  }
  if (temperature == 0.0) return 0.0;
  const double x = constants::hbar * omega / (constants::k_boltzmann * temperature);
  return 1.0 / std::expm1(x);
}

inline ThermalOccupations thermal_occupations(const SystemParams& p) {
  return {thermal_occupation(p.omega_a_abs(), p.temperature),
          thermal_occupation(p.omega_b_abs(), p.temperature),
          thermal_occupation(p.omega_s_abs(), p.temperature)};
}

/// Coherent drive amplitude sqrt(2 kappa_a P / (hbar omega_d)), all SI.
inline double drive_amplitude_from_power(double power, double kappa_a, double omega_d) {
  if (!(power >= 0.0) || !(kappa_a > 0.0) || !(omega_d > 0.0)) {
    throw DomainError("drive_amplitude_from_power: arguments must be positive");
  }
  return std::sqrt(2.0 * kappa_a * power / (constants::hbar * omega_d));
}

/// Inverse of drive_amplitude_from_power.
inline double power_from_drive_amplitude(double epsilon_d, double kappa_a, double omega_d) {
  if (!(epsilon_d >= 0.0) || !(kappa_a > 0.0) || !(omega_d > 0.0)) {
    throw DomainError("power_from_drive_amplitude: arguments must be positive");
  }
  return epsilon_d * epsilon_d * constants::hbar * omega_d / (2.0 * kappa_a);
}

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

/// Best rational approximation of x with denominator <= max_den, by
/// continued-fraction convergents. Returns nullopt if no convergent reaches
/// the relative tolerance.
inline std::optional<Rational> rationalize(double x, std::int64_t max_den, double rel_tol) {
  if (!(x > 0.0) || !std::isfinite(x)) return std::nullopt;
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(x));
  std::int64_t k_prev = 0, k = 1;
  double frac = x - std::floor(x);
  for (int iter = 0; iter < 64; ++iter) {
    if (std::abs(static_cast<double>(h) / static_cast<double>(k) - x) <= rel_tol * x) {
      if (h == 0) return std::nullopt;
      return Rational{h, k};
    }
    if (frac < 1e-300) break;
    const double inv = 1.0 / frac;
    const auto digit = static_cast<std::int64_t>(std::floor(inv));
    frac = inv - std::floor(inv);
    const std::int64_t h_next = digit * h + h_prev;
    const std::int64_t k_next = digit * k + k_prev;
    if (k_next > max_den) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return std::nullopt;
}

inline constexpr std::int64_t kMaxPeriodDenominator = 64;
inline constexpr double kCommensurabilityTolerance = 1e-9;

/// Least common period of the parametric modulations. Throws DomainError
/// when neither drive is active (the system is autonomous) and
/// CommensurabilityError when omega_m / omega_c_prime is not a small
/// rational.
inline double common_period(double omega_c_prime, double omega_m, double xi_c, double xi_m) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const bool opa = xi_c > 0.0;
  const bool mpa = xi_m > 0.0;
  if (!opa && !mpa) {
    throw DomainError("common_period: no parametric drive active, period undefined");
  }
  if (opa && !(omega_c_prime > 0.0)) {
    throw DomainError("common_period: optical parametric frequency must be positive");
  }
  if (mpa && !(omega_m > 0.0)) {
    throw DomainError("common_period: mechanical parametric frequency must be positive");
  }
  if (opa && !mpa) return two_pi / omega_c_prime;
  if (mpa && !opa) return two_pi / omega_m;
  const auto ratio =
      rationalize(omega_m / omega_c_prime, kMaxPeriodDenominator, kCommensurabilityTolerance);
  if (!ratio) {
    throw CommensurabilityError("common_period: omega_m/omega_c' = " +
                                std::to_string(omega_m / omega_c_prime) +
                                " has no rational approximation with denominator <= 64");
  }
  return two_pi * static_cast<double>(ratio->den) / omega_c_prime;
}

inline double common_period(const SystemParams& p) {
  return common_period(p.omega_c_prime, p.omega_m, p.xi_c, p.xi_m);
}

/// Throws DomainError naming the first offending field.
inline void validate(const SystemParams& p) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw DomainError(std::string("invalid parameters: ") + what);
  };
  const double values[] = {p.omega_b,  p.delta_a, p.delta_s, p.omega_c_prime, p.omega_m,
                           p.g,        p.lambda,  p.kappa_a, p.kappa_m,       p.gamma_b,
                           p.xi_c,     p.xi_m,    p.theta_c, p.theta_m,       p.epsilon_d,
                           p.temperature, p.omega_b_si, p.omega_d_si};
  for (double v : values) require(std::isfinite(v), "all parameters must be finite");
  require(p.omega_b > 0.0, "omega_b must be positive");
  require(p.omega_b_si > 0.0, "omega_b_si must be positive");
  require(p.kappa_a > 0.0, "kappa_a must be positive");
  require(p.kappa_m > 0.0, "kappa_m must be positive");
  require(p.gamma_b > 0.0, "gamma_b must be positive");
  require(p.xi_c >= 0.0, "xi_c must be non-negative");
  require(p.xi_m >= 0.0, "xi_m must be non-negative");
  require(p.temperature >= 0.0, "temperature must be non-negative");
  require(p.epsilon_d >= 0.0, "epsilon_d must be non-negative");
  if (p.omega_a_si) require(*p.omega_a_si > 0.0, "omega_a must be positive");
  if (p.omega_s_si) require(*p.omega_s_si > 0.0, "omega_s must be positive");
  // Absolute frequencies, when supplied, must agree with the detunings.
  const double tol = 1e-9 * p.omega_d_si;
  if (p.omega_a_si) {
    require(std::abs(*p.omega_a_si - p.omega_d_si - p.delta_a * p.omega_b_si) <= tol,
            "delta_a must equal omega_a - omega_d");
  }
  if (p.omega_s_si) {
    require(std::abs(*p.omega_s_si - p.omega_d_si - p.delta_s * p.omega_b_si) <= tol,
            "delta_s must equal omega_s - omega_d");
  }
  if (p.omega_c_si) {
    require(std::abs(*p.omega_c_si - 2.0 * p.omega_d_si - p.omega_c_prime * p.omega_b_si) <= tol,
            "omega_c_prime must equal omega_c - 2 omega_d");
  }
  if (p.opa_active()) require(p.omega_c_prime > 0.0, "omega_c_prime must be positive with OPA on");
  if (p.mpa_active()) require(p.omega_m > 0.0, "omega_m must be positive with MPA on");
}

}  // namespace magnomech
