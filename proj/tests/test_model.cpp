#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "magnomech/config.hpp"
#include "magnomech/fourier.hpp"
#include "magnomech/meanfield.hpp"
#include "magnomech/ode.hpp"
#include "magnomech/params.hpp"
#include "magnomech/presets.hpp"

using namespace magnomech;
constexpr double kPi = std::numbers::pi;

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

SystemParams bistable_drive_point() {
  SystemParams p = presets::entanglement_base();
  p.delta_a = 1.0;
  p.epsilon_d = 6e4;
  p.temperature = 0.0;
  return p;
}

}  // namespace

// Reference values from an independent double-precision evaluation of
// 1 / expm1(hbar w / kB T).
TEST(ThermalOccupation, MechanicalModeAtTenMillikelvin) {
  EXPECT_LT(rel(thermal_occupation(2 * kPi * 10e6, 0.01), 20.340618351800995), 1e-12);
}

TEST(ThermalOccupation, MicrowaveModeIsFrozenOut) {
  EXPECT_LT(rel(thermal_occupation(2 * kPi * 10e9, 0.01), 1.4359925012169505e-21), 1e-9);
}

TEST(ThermalOccupation, ZeroTemperatureAndBadInput) {
  EXPECT_EQ(thermal_occupation(1e6, 0.0), 0.0);
  EXPECT_THROW(thermal_occupation(0.0, 0.01), DomainError);
  EXPECT_THROW(thermal_occupation(1e6, -1.0), DomainError);
}

TEST(ThermalOccupation, HighTemperatureLimit) {
  const double w = 2 * kPi * 1e3;
  const double t = 10.0;
  const double classical = constants::k_boltzmann * t / (constants::hbar * w);
  EXPECT_NEAR(thermal_occupation(w, t), classical - 0.5, 1e-6 * classical);
}

TEST(DriveAmplitude, PowerRoundTrip) {
  const double kappa = 2 * kPi * 2e6;
  const double omega_d = 2 * kPi * 10e9;
  for (double power : {1e-9, 1e-6, 3.5e-3}) {
    const double eps = drive_amplitude_from_power(power, kappa, omega_d);
    EXPECT_NEAR(eps, std::sqrt(2 * kappa * power / (constants::hbar * omega_d)), 1e-12 * eps);
    EXPECT_LT(rel(power_from_drive_amplitude(eps, kappa, omega_d), power), 1e-12);
  }
}

TEST(CommonPeriod, SingleDrives) {
  EXPECT_DOUBLE_EQ(common_period(1.2, 0.0, 0.1, 0.0), 2 * kPi / 1.2);
  EXPECT_DOUBLE_EQ(common_period(0.0, 1.8, 0.0, 0.1), 2 * kPi / 1.8);
}

TEST(CommonPeriod, RationalRatio) {
  // omega_m / omega_c' = 9/5: five optical periods, nine mechanical ones.
  const double tau = common_period(1.0, 1.8, 0.1, 0.1);
  EXPECT_NEAR(tau, 2 * kPi * 5.0, 1e-12);
  EXPECT_NEAR(std::remainder(tau * 1.8, 2 * kPi), 0.0, 1e-9);
  EXPECT_NEAR(common_period(1.2, 1.2, 0.05, 0.05), 2 * kPi / 1.2, 1e-12);
}

TEST(CommonPeriod, Errors) {
  EXPECT_THROW(common_period(1.0, 1.0, 0.0, 0.0), DomainError);
  EXPECT_THROW(common_period(1.0, kPi, 0.1, 0.1), CommensurabilityError);
  EXPECT_THROW(common_period(0.0, 1.0, 0.1, 0.0), DomainError);
}

TEST(Config, NumbersWithPi) {
  const auto num = [](const char* text) { return parse_number({"x", text, 1}); };
  EXPECT_DOUBLE_EQ(num("pi"), kPi);
  EXPECT_DOUBLE_EQ(num("-pi"), -kPi);
  EXPECT_DOUBLE_EQ(num("0.5pi"), 0.5 * kPi);
  EXPECT_DOUBLE_EQ(num("2*pi"), 2 * kPi);
  EXPECT_DOUBLE_EQ(num("+1.5e-3"), 1.5e-3);
  EXPECT_THROW(num("1.0x"), ParseError);
  EXPECT_THROW(num("pie"), ParseError);
}

TEST(Config, ScaledAndSiKeysAgree) {
  const SystemParams scaled = parse_params(
      "kappa_a_over_omega_b = 0.2\n"
      "delta_a_over_omega_b = 0.73\n");
  const SystemParams si = parse_params(
      "omega_b = 6.283185307179586e7\n"
      "kappa_a = 1.2566370614359172e7   # rad/s\n"
      "delta_a = 4.586725274241098e7\n");
  EXPECT_NEAR(si.kappa_a, scaled.kappa_a, 1e-14);
  EXPECT_NEAR(si.delta_a, scaled.delta_a, 1e-14);
}

TEST(Config, PhaseKeys) {
  const SystemParams p = parse_params("theta_c = 0.5pi\ndelta_theta = 0.25pi\n");
  EXPECT_DOUBLE_EQ(p.theta_c, 0.5 * kPi);
  EXPECT_DOUBLE_EQ(p.delta_theta(), 0.25 * kPi);
}

TEST(Config, PowerSetsDriveAmplitude) {
  const SystemParams p = parse_params("power = 1e-6\nkappa_a_over_omega_b = 0.2\n");
  const double expected =
      drive_amplitude_from_power(1e-6, 0.2 * p.omega_b_si, p.omega_d_si) / p.omega_b_si;
  EXPECT_LT(rel(p.epsilon_d, expected), 1e-14);
}

TEST(Config, Errors) {
  const auto fails_with = [](const char* text, const char* fragment) {
    try {
      parse_params(text);
    } catch (const ParseError& e) {
      return std::string(e.what()).find(fragment) != std::string::npos;
    }
    return false;
  };
  EXPECT_TRUE(fails_with("kappa_a_over_omega_b = 0.2\nfoo = 1\n", "line 2"));
  EXPECT_TRUE(fails_with("foo = 1\n", "unknown key 'foo'"));
  EXPECT_TRUE(fails_with("g = 1\ng = 2\n", "duplicate key"));
  EXPECT_TRUE(fails_with("g = 300\ng_over_omega_b = 5e-6\n", "conflicts"));
  EXPECT_TRUE(fails_with("power = 1e-6\nepsilon_d_over_omega_b = 1\n", "mutually exclusive"));
  EXPECT_TRUE(fails_with("delta_theta = 1\ntheta_m = 1\n", "mutually exclusive"));
  EXPECT_TRUE(fails_with("kappa_a_over_omega_b = -1\n", "kappa_a"));
  EXPECT_TRUE(fails_with("just text\n", "key = value"));
  EXPECT_TRUE(fails_with("sweep.axis1.name = g\n", "unknown key"));
}

TEST(Config, ShippedParameterFilesMatchPresets) {
  const std::string dir = MAGNOMECH_CONFIG_DIR;
  const SystemParams scaled = load_params(dir + "/no_drive.params");
  const SystemParams si = load_params(dir + "/si_units.params");
  const SystemParams want = presets::entanglement_base();
  for (const SystemParams& p : {scaled, si}) {
    EXPECT_NEAR(p.delta_a, want.delta_a, 1e-9);
    EXPECT_NEAR(p.delta_s, want.delta_s, 1e-9);
    EXPECT_NEAR(p.g, want.g, 1e-14);
    EXPECT_NEAR(p.lambda, want.lambda, 1e-9);
    EXPECT_NEAR(p.kappa_a, want.kappa_a, 1e-9);
    EXPECT_NEAR(p.gamma_b, want.gamma_b, 1e-14);
    EXPECT_EQ(p.epsilon_d, want.epsilon_d);
  }
  EXPECT_THROW(load_params(dir + "/does_not_exist.params"), IoError);
}

TEST(Ode, ExponentialDecay) {
  ode::Options opt;
  opt.rtol = 1e-11;
  opt.atol = 1e-14;
  using V = Eigen::Matrix<double, 1, 1>;
  const V y = ode::integrate<1>([](double, const V& x) -> V { return -x; }, 0.0, 5.0, V(1.0), opt);
  EXPECT_NEAR(y[0], std::exp(-5.0), 1e-11);
}

TEST(Ode, HarmonicOscillatorDenseOutput) {
  ode::Options opt;
  opt.rtol = 1e-11;
  opt.atol = 1e-13;
  using V = Eigen::Vector2d;
  auto rhs = [](double, const V& x) -> V { return V(x[1], -x[0]); };
  const auto sol = ode::solve_dense<2>(rhs, 0.0, 20 * kPi, V(1.0, 0.0), opt);
  for (double t : {0.3, 7.77, 31.0, 62.0}) {
    EXPECT_NEAR(sol(t)[0], std::cos(t), 1e-8) << "t=" << t;
    EXPECT_NEAR(sol(t)[1], -std::sin(t), 1e-8) << "t=" << t;
  }
}

TEST(Ode, StepBudgetIsEnforced) {
  ode::Options opt;
  opt.max_steps = 10;
  using V = Eigen::Vector2d;
  auto rhs = [](double, const V& x) -> V { return V(x[1], -x[0]); };
  EXPECT_THROW(ode::integrate<2>(rhs, 0.0, 1e4, V(1.0, 0.0), opt), IntegrationError);
}

// a0 frozen from a separate damped fixed-point iteration of the static
// mean-value equations (different algorithm, same equations).
TEST(FixedPoint, GoldenCavityAmplitude) {
  const ModeAmplitudes s = find_fixed_point(bistable_drive_point());
  EXPECT_LT(rel(s.a.real(), 11737.576108487869), 1e-8);
  EXPECT_LT(rel(s.a.imag(), -51971.96286493378), 1e-8);
  EXPECT_LT(rel(s.b.real(), 14194.278083263582), 1e-8);
}

TEST(FixedPoint, SolvesStaticEquations) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> det(0.3, 1.5);
  std::uniform_real_distribution<double> drive(1e4, 4e4);
  for (int k = 0; k < 20; ++k) {
    SystemParams p = presets::entanglement_base();
    p.delta_a = det(rng);
    p.epsilon_d = drive(rng);
    const ModeAmplitudes s = find_fixed_point(p);
    const ModeAmplitudes d = meanfield_rhs(s, 0.0, p);
    EXPECT_LT(std::abs(d.a), 1e-8 * p.epsilon_d);
    EXPECT_LT(std::abs(d.b), 1e-8 * p.epsilon_d);
    EXPECT_LT(std::abs(d.m), 1e-8 * p.epsilon_d);
  }
}

TEST(FixedPoint, LowestBranchInBistableWindow) {
  SystemParams p = presets::entanglement_base();
  p.delta_a = 0.55;
  const auto roots = detail::photon_number_roots(p);
  ASSERT_FALSE(roots.empty());
  const ModeAmplitudes s = find_fixed_point(p);
  EXPECT_LT(rel(std::norm(s.a), roots.front()), 1e-8);
}

TEST(MeanField, JacobianMatchesFiniteDifferences) {
  SystemParams p = presets::dual_matched();
  p.xi_c = 0.07;
  p.xi_m = 0.03;
  p.theta_c = 0.4;
  p.theta_m = -1.1;
  const ModeAmplitudes s{{3e4, -2e4}, {1.5e3, 0.4}, {-1e3, 2e3}};
  for (double t : {0.0, 0.9, 3.3}) {
    const Mat6 jac = meanfield_jacobian(s, t, p);
    const Vec6 x = s.flatten();
    for (int k = 0; k < 6; ++k) {
      const double h = 1e-3;
      Vec6 xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const Vec6 col = (meanfield_rhs(ModeAmplitudes::unflatten(xp), t, p).flatten() -
                        meanfield_rhs(ModeAmplitudes::unflatten(xm), t, p).flatten()) /
                       (2 * h);
      EXPECT_LT((jac.col(k) - col).norm(), 1e-6 * (1.0 + col.norm())) << "t=" << t << " k=" << k;
    }
  }
}

TEST(MeanField, PeriodicOrbitClosesAfterOnePeriod) {
  const SystemParams p = presets::opa_only();
  const MeanTrajectory orbit = steady_meanfield(p);
  ASSERT_TRUE(orbit.period.has_value());
  const double tau = *orbit.period;
  EXPECT_NEAR(tau, 2 * kPi, 1e-12);
  const ModeAmplitudes start = orbit.at(0.0);
  const ModeAmplitudes end = propagate_meanfield(p, 0.0, tau, start);
  EXPECT_LT((end.flatten() - start.flatten()).norm(), 1e-7 * start.flatten().norm());
  EXPECT_LT(std::abs(orbit.at(0.7 + tau).a - orbit.at(0.7).a), 1e-9 * std::abs(start.a));
}

TEST(MeanField, AutonomousSystemReturnsFixedPoint) {
  const SystemParams p = presets::entanglement_base();
  const MeanTrajectory traj = steady_meanfield(p);
  EXPECT_TRUE(traj.constant());
  EXPECT_FALSE(traj.period.has_value());
  EXPECT_EQ(traj.states.size(), 1u);
}

TEST(MeanField, DivergentOrbitIsReported) {
  EXPECT_THROW(steady_meanfield(presets::mpa_only()), InstabilityError);
}

TEST(MeanField, SelfOscillationHasNoPeriodicOrbit) {
  SystemParams p = presets::opa_only();
  p.omega_c_prime = 0.5;
  EXPECT_THROW(steady_meanfield(p), LimitCycleError);
}

TEST(Analytic, ReducesToFixedPointWithoutDrive) {
  SystemParams p = presets::meanfield_demo();
  p.xi_c = 1e-8;
  const FourierCoefficients c = analytic_coefficients(p);
  p.xi_c = 0.0;
  const ModeAmplitudes s = find_fixed_point(p);
  EXPECT_LT(std::abs(c.a0 - s.a) / std::abs(s.a), 1e-10);
  EXPECT_LT(std::abs(c.epsilon_s * c.a_plus), 1e-6 * std::abs(s.a));
}

TEST(Analytic, RejectsMechanicalDrive) {
  EXPECT_THROW(analytic_coefficients(presets::dual_matched()), DomainError);
}
