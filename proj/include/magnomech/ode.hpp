#pragma once

// Adaptive Dormand-Prince 5(4) integrator with the 4th-order continuous
// extension (Hairer, Norsett & Wanner, "Solving ODEs I", dopri5).
//
// States are fixed- or dynamic-size Eigen column vectors. The right-hand
// side is any callable `State f(double t, const State& y)`.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "magnomech/errors.hpp"

namespace magnomech::ode {

struct Options {
  double rtol = 1e-9;
  double atol = 1e-9;
  /// 0 selects the starting step automatically.
  double initial_step = 0.0;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 20'000'000;
};

/// Dense-output polynomial for one accepted step.
template <int N>
struct DenseStep {
  using State = Eigen::Matrix<double, N, 1>;

  double t0 = 0.0;
  double h = 0.0;
  std::array<State, 5> coeffs;

  double t1() const { return t0 + h; }

  State operator()(double t) const {
    const double theta = (t - t0) / h;
    const double theta1 = 1.0 - theta;
    return coeffs[0] +
           theta * (coeffs[1] + theta1 * (coeffs[2] + theta * (coeffs[3] + theta1 * coeffs[4])));
  }
};

/// Piecewise dense solution over [t_begin, t_end].
template <int N>
class DenseSolution {
 public:
  using State = Eigen::Matrix<double, N, 1>;

  void push(DenseStep<N> step) { steps_.push_back(std::move(step)); }

  bool empty() const { return steps_.empty(); }
  double t_begin() const { return steps_.front().t0; }
  double t_end() const { return steps_.back().t1(); }
  std::size_t size() const { return steps_.size(); }

  State operator()(double t) const {
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](double value, const DenseStep<N>& s) { return value < s.t1(); });
    if (it == steps_.end()) it = std::prev(steps_.end());
    return (*it)(t);
  }

 private:
  std::vector<DenseStep<N>> steps_;
};

namespace detail {

struct Tableau {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

template <class State>
double scaled_rms(const State& v, const State& y0, const State& y1, const Options& opt) {
  const auto scale =
      (opt.atol + opt.rtol * y0.array().abs().max(y1.array().abs())).eval();
  return std::sqrt((v.array() / scale).square().mean());
}

}  // namespace detail

/// Integrates from t0 to t1 (t1 >= t0) and returns y(t1). `on_step` receives
/// each accepted DenseStep in order.
template <int N, class Rhs, class Observer>
Eigen::Matrix<double, N, 1> integrate(Rhs&& f, double t0, double t1,
                                      Eigen::Matrix<double, N, 1> y, const Options& opt,
                                      Observer&& on_step) {
  using State = Eigen::Matrix<double, N, 1>;
  using T = detail::Tableau;
  if (!(t1 >= t0)) throw DomainError("ode::integrate: t1 must not precede t0");
  if (t1 == t0) return y;

  const double span = t1 - t0;
  State k1 = f(t0, y);
  double h = opt.initial_step;
  if (h <= 0.0) {
    // Starting step heuristic from Hairer's hinit.
    const double d0 = detail::scaled_rms(y, y, y, opt);
    const double d1 = detail::scaled_rms(k1, y, y, opt);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const State y1 = y + h0 * k1;
    const State k2 = f(t0 + h0, y1);
    const double d2 = detail::scaled_rms((k2 - k1).eval(), y, y, opt) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    h = std::min(100.0 * h0, h1);
  }
  h = std::min({h, opt.max_step, span});

  double t = t0;
  double err_prev = 1e-4;
  bool last_rejected = false;
  for (std::size_t step = 0; step < opt.max_steps; ++step) {
    bool final_step = false;
    if (t + h >= t1 || t1 - (t + h) < 1e-12 * span) {
      h = t1 - t;
      final_step = true;
    }
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
    if (h < hmin) {
      if (final_step) return y;
      throw IntegrationError("ode::integrate: step size underflow", t);
    }

    const State k2 = f(t + T::c2 * h, (y + h * T::a21 * k1).eval());
    const State k3 = f(t + T::c3 * h, (y + h * (T::a31 * k1 + T::a32 * k2)).eval());
    const State k4 = f(t + T::c4 * h, (y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3)).eval());
    const State k5 = f(t + T::c5 * h,
                       (y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4)).eval());
    const State k6 =
        f(t + h,
          (y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5)).eval());
    const State y_new =
        y + h * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
    const State k7 = f(t + h, y_new);
    const State err_vec =
        h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
    const double err = detail::scaled_rms(err_vec, y, y_new, opt);

    if (!std::isfinite(err)) {
      h *= 0.1;
      last_rejected = true;
      continue;
    }

    if (err <= 1.0) {
      DenseStep<N> dense;
      dense.t0 = t;
      dense.h = h;
      const State ydiff = y_new - y;
      const State bspl = h * k1 - ydiff;
      dense.coeffs[0] = y;
      dense.coeffs[1] = ydiff;
      dense.coeffs[2] = bspl;
      dense.coeffs[3] = ydiff - h * k7 - bspl;
      dense.coeffs[4] = h * (T::d1 * k1 + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 + T::d6 * k6 +
                             T::d7 * k7);
      on_step(std::as_const(dense));

      t = final_step ? t1 : t + h;
      y = y_new;
      k1 = k7;
      if (final_step) return y;

      // PI step-size control.
      const double e = std::max(err, 1e-10);
      double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      fac = std::clamp(fac, 0.2, 10.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h = std::min(h * fac, opt.max_step);
      err_prev = e;
      last_rejected = false;
    } else {
      const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h *= fac;
      last_rejected = true;
    }
  }
  throw IntegrationError("ode::integrate: maximum number of steps exceeded", t);
}

template <int N, class Rhs>
Eigen::Matrix<double, N, 1> integrate(Rhs&& f, double t0, double t1,
                                      Eigen::Matrix<double, N, 1> y, const Options& opt) {
  return integrate<N>(std::forward<Rhs>(f), t0, t1, std::move(y), opt,
                      [](const DenseStep<N>&) {});
}

template <int N, class Rhs>
DenseSolution<N> solve_dense(Rhs&& f, double t0, double t1, Eigen::Matrix<double, N, 1> y,
                             const Options& opt) {
  DenseSolution<N> sol;
  if (t1 == t0) {
    DenseStep<N> s;
    s.t0 = t0;
    s.h = 1.0;
    s.coeffs[0] = y;
    for (int i = 1; i < 5; ++i) s.coeffs[i] = Eigen::Matrix<double, N, 1>::Zero(y.size());
    sol.push(s);
    return sol;
  }
  integrate<N>(std::forward<Rhs>(f), t0, t1, std::move(y), opt,
               [&sol](const DenseStep<N>& s) { sol.push(s); });
  return sol;
}

/// Values at the sorted instants `times` (all >= t0) starting from y(t0).
template <int N, class Rhs>
std::vector<Eigen::Matrix<double, N, 1>> sample(Rhs&& f, double t0,
                                                Eigen::Matrix<double, N, 1> y,
                                                std::span<const double> times,
                                                const Options& opt) {
  std::vector<Eigen::Matrix<double, N, 1>> out;
  out.reserve(times.size());
  std::size_t next = 0;
  while (next < times.size() && times[next] <= t0) {
    out.push_back(y);
    ++next;
  }
  if (next == times.size()) return out;
  integrate<N>(std::forward<Rhs>(f), t0, times.back(), std::move(y), opt,
               [&](const DenseStep<N>& s) {
                 while (next < times.size() && times[next] <= s.t1()) {
                   out.push_back(s(times[next]));
                   ++next;
                 }
               });
  return out;
}

}  // namespace magnomech::ode
