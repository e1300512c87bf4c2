#pragma once

// Gaussian entanglement measures on covariance matrices in the quadrature
// ordering (Ar, Ai, Br, Bi, Mr, Mi): logarithmic negativities for mode
// pairs and one-vs-two bipartitions, contangles (squared negativities) and
// the minimum residual contangle.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "magnomech/errors.hpp"
#include "magnomech/fluctuations.hpp"
#include "magnomech/linalg.hpp"
#include "magnomech/meanfield.hpp"
#include "magnomech/params.hpp"

namespace magnomech {

inline constexpr std::array<Mode, 3> kAllModes = {Mode::cavity, Mode::mechanics, Mode::magnon};

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::cavity: return "a";
    case Mode::mechanics: return "b";
    case Mode::magnon: return "m";
  }
  return "?";
}

/// Minimum symplectic eigenvalue floor applied before taking the logarithm.
inline constexpr double kSymplecticFloor = 1e-12;
/// Residuals below -kMonogamyTolerance count as monogamy violations.
inline constexpr double kMonogamyTolerance = 1e-9;

/// Principal submatrix over the retained modes, in canonical order.
inline Eigen::MatrixXd reduce_cm(const Eigen::MatrixXd& v, std::span<const Mode> modes) {
  if (modes.empty()) throw DomainError("reduce_cm: empty mode selection");
  std::vector<int> kept;
  for (Mode m : modes) kept.push_back(static_cast<int>(m));
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (2 * static_cast<Eigen::Index>(kept.back()) + 1 >= v.rows()) {
    throw DomainError("reduce_cm: mode index out of range");
  }
  const auto n = static_cast<Eigen::Index>(2 * kept.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index si = 2 * kept[i / 2] + i % 2;
      const Eigen::Index sj = 2 * kept[j / 2] + j % 2;
      out(i, j) = v(si, sj);
    }
  return out;
}

inline Eigen::MatrixXd reduce_cm(const Eigen::MatrixXd& v, std::initializer_list<Mode> modes) {
  return reduce_cm(v, std::span<const Mode>(modes.begin(), modes.size()));
}

/// P V P with P flipping the momentum quadrature of mode `flipped` (index
/// within the matrix, not the global Mode).
inline Eigen::MatrixXd partial_transpose(const Eigen::MatrixXd& v, int flipped) {
  if (flipped < 0 || 2 * flipped + 1 >= v.rows()) {
    throw DomainError("partial_transpose: mode index out of range");
  }
  Eigen::MatrixXd out = v;
  const Eigen::Index k = 2 * flipped + 1;
  out.row(k) *= -1.0;
  out.col(k) *= -1.0;
  return out;
}

/// The n symplectic eigenvalues of a 2n x 2n symmetric matrix, ascending.
inline std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& v) {
  if (v.rows() != v.cols() || v.rows() % 2 != 0 || v.rows() == 0) {
    throw DomainError("symplectic_eigenvalues: matrix must be 2n x 2n");
  }
  if ((v - v.transpose()).norm() > 1e-9 * std::max(v.norm(), 1.0)) {
    throw DomainError("symplectic_eigenvalues: matrix is not symmetric");
  }
  const auto n = v.rows() / 2;
  const Eigen::MatrixXd omega = linalg::symplectic_form(static_cast<int>(n));
  const Eigen::MatrixXd vs = linalg::symmetrize(v);
  std::vector<double> all;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(vs);
  if (es.eigenvalues().minCoeff() > 0.0) {
    // Positive definite: the spectrum of i V^1/2 Omega V^1/2 (Hermitian) is
    // {+nu_k, -nu_k}.
    const Eigen::MatrixXd root =
        es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    const Eigen::MatrixXcd h = Complex(0.0, 1.0) * (root * omega * root).cast<Complex>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(h, Eigen::EigenvaluesOnly);
    for (Eigen::Index k = 0; k < hs.eigenvalues().size(); ++k) all.push_back(hs.eigenvalues()[k]);
    std::sort(all.begin(), all.end());
    return std::vector<double>(all.begin() + n, all.end());
  }
  Eigen::EigenSolver<Eigen::MatrixXd> gs(omega * vs, false);
  for (Eigen::Index k = 0; k < gs.eigenvalues().size(); ++k) {
    all.push_back(std::abs(gs.eigenvalues()[k]));
  }
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (std::size_t k = 0; k < all.size(); k += 2) out.push_back(0.5 * (all[k] + all[k + 1]));
  return out;
}

inline double min_symplectic_eigenvalue(const Eigen::MatrixXd& v) {
  return symplectic_eigenvalues(v).front();
}

/// max(0, -ln(2 nu_min)) of an already partially transposed matrix.
inline double log_negativity_from_transposed(const Eigen::MatrixXd& transposed) {
  double nu = min_symplectic_eigenvalue(transposed);
  if (nu < kSymplecticFloor) {
    std::clog << "magnomech: warning: symplectic eigenvalue " << nu << " clamped to "
              << kSymplecticFloor << "\n";
    nu = kSymplecticFloor;
  }
  return std::max(0.0, -std::log(2.0 * nu));
}

/// Logarithmic negativity between two modes; the first listed is transposed.
inline double log_negativity_pair(const Eigen::MatrixXd& v6, Mode first, Mode second) {
  if (first == second) throw DomainError("log_negativity_pair: modes must differ");
  const Eigen::MatrixXd v4 = reduce_cm(v6, {first, second});
  const int flipped = static_cast<int>(first) < static_cast<int>(second) ? 0 : 1;
  return log_negativity_from_transposed(partial_transpose(v4, flipped));
}

/// Logarithmic negativity of the bipartition probe | (other two modes).
inline double log_negativity_1v2(const Eigen::MatrixXd& v6, Mode probe) {
  if (v6.rows() != 6) throw DomainError("log_negativity_1v2: expected a 6x6 matrix");
  return log_negativity_from_transposed(partial_transpose(v6, static_cast<int>(probe)));
}

struct EntanglementReport {
  /// Pairs (a,b), (a,m), (b,m).
  std::array<double, 3> pairwise_logneg{};
  /// Probes a, b, m against the remaining two modes.
  std::array<double, 3> one_vs_two_logneg{};
  /// Residual contangle for probes a, b, m.
  std::array<double, 3> residuals{};
  double r_min = 0.0;
  /// Every probe attaining r_min.
  std::vector<Mode> argmin;
  bool monogamy_ok = true;
  double time = 0.0;
};

inline constexpr std::array<std::pair<Mode, Mode>, 3> kModePairs = {
    {{Mode::cavity, Mode::mechanics}, {Mode::cavity, Mode::magnon}, {Mode::mechanics, Mode::magnon}}};

inline EntanglementReport residual_contangle(const Eigen::MatrixXd& v6, double time = 0.0) {
  EntanglementReport r;
  r.time = time;
  // Pairwise contangles with the probe transposed; keyed [probe][other].
  std::array<std::array<double, 3>, 3> pair_contangle{};
  for (std::size_t k = 0; k < kModePairs.size(); ++k) {
    const auto [x, y] = kModePairs[k];
    const double en_xy = log_negativity_pair(v6, x, y);
    const double en_yx = log_negativity_pair(v6, y, x);
    r.pairwise_logneg[k] = en_xy;
    pair_contangle[static_cast<int>(x)][static_cast<int>(y)] = en_xy * en_xy;
    pair_contangle[static_cast<int>(y)][static_cast<int>(x)] = en_yx * en_yx;
  }
  for (Mode probe : kAllModes) {
    const int rp = static_cast<int>(probe);
    const double en = log_negativity_1v2(v6, probe);
    r.one_vs_two_logneg[rp] = en;
    double residual = en * en;
    for (Mode other : kAllModes) {
      if (other != probe) residual -= pair_contangle[rp][static_cast<int>(other)];
    }
    r.residuals[rp] = residual;
  }
  r.r_min = *std::min_element(r.residuals.begin(), r.residuals.end());
  for (Mode probe : kAllModes) {
    if (r.residuals[static_cast<int>(probe)] == r.r_min) r.argmin.push_back(probe);
    if (r.residuals[static_cast<int>(probe)] < -kMonogamyTolerance) r.monogamy_ok = false;
  }
  return r;
}

inline EntanglementReport residual_contangle(const CovarianceMatrix& v) {
  return residual_contangle(v.entries, v.time);
}

struct PeriodSummary {
  std::vector<EntanglementReport> samples;
  double r_max = 0.0;
  /// Orbit phase at which r_max is attained (after refinement).
  double t_max = 0.0;
  /// Full report at t_max.
  EntanglementReport at_max;
  bool monogamy_ok = true;
  /// Every sampled covariance matrix passed physicality_check.
  bool physical = true;
};

struct PeriodOptions {
  std::size_t n_samples = 256;
  /// Golden-section stops once the peak estimate moves less than this.
  double refine_rel_tol = 1e-4;
  int max_refine_iterations = 60;
  CovarianceOptions covariance{};
};

/// Summary over one period from covariance samples at t_k = k tau / n.
/// `refine(t)` returns the EntanglementReport at an arbitrary phase and
/// drives the golden-section refinement around the coarse maximum.
template <class Refine>
PeriodSummary summarize_period(const std::vector<CovarianceMatrix>& cms, double tau,
                               const PeriodOptions& opt, Refine&& refine) {
  PeriodSummary s;
  s.samples.reserve(cms.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < cms.size(); ++k) {
    s.samples.push_back(residual_contangle(cms[k]));
    if (!physicality_check(cms[k])) s.physical = false;
    if (!s.samples.back().monogamy_ok) s.monogamy_ok = false;
    if (s.samples[k].r_min > s.samples[best].r_min) best = k;
  }
  s.at_max = s.samples[best];
  s.r_max = s.at_max.r_min;
  s.t_max = s.at_max.time;
  if (cms.size() < 3 || tau <= 0.0) return s;

  // Golden-section search for the maximum on [t_best - dt, t_best + dt].
  const double dt = tau / static_cast<double>(cms.size());
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = s.t_max - dt;
  double hi = s.t_max + dt;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  EntanglementReport f1 = refine(x1);
  EntanglementReport f2 = refine(x2);
  double estimate = s.r_max;
  for (int it = 0; it < opt.max_refine_iterations; ++it) {
    if (f1.r_min > f2.r_min) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = refine(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = refine(x2);
    }
    const double current = std::max(f1.r_min, f2.r_min);
    const double change = std::abs(current - estimate);
    estimate = current;
    if (change <= opt.refine_rel_tol * std::max(std::abs(current), 1e-12) && it >= 2) break;
  }
  const EntanglementReport& refined = f1.r_min > f2.r_min ? f1 : f2;
  if (refined.r_min > s.r_max) {
    s.at_max = refined;
    s.at_max.time = refined.time - tau * std::floor(refined.time / tau);
    s.r_max = refined.r_min;
    s.t_max = s.at_max.time;
  }
  return s;
}

/// Periodic steady state entanglement: residual contangle sampled over one
/// period and its refined maximum. A constant mean field yields a single
/// stationary sample.
inline PeriodSummary max_over_period(const SystemParams& p, const MeanTrajectory& orbit,
                                     const PeriodOptions& opt = {},
                                     const std::optional<Monodromy>& precomputed = std::nullopt) {
  if (orbit.constant() || !orbit.period) {
    const CovarianceMatrix v = stationary_cm(p, orbit.states.front());
    PeriodSummary s;
    s.samples.push_back(residual_contangle(v));
    s.at_max = s.samples.front();
    s.r_max = s.at_max.r_min;
    s.monogamy_ok = s.samples.front().monogamy_ok;
    s.physical = physicality_check(v);
    return s;
  }
  const double tau = *orbit.period;
  const Monodromy m = precomputed ? *precomputed : monodromy(p, orbit, tau, opt.covariance);
  const std::vector<CovarianceMatrix> cms =
      periodic_steady_cm(p, orbit, tau, m, opt.n_samples, opt.covariance);
  return summarize_period(cms, tau, opt, [&](double t) {
    // Integrate forward from the nearest preceding periodic sample.
    const double wrapped = t - tau * std::floor(t / tau);
    auto k = static_cast<std::size_t>(std::floor(wrapped / tau * static_cast<double>(cms.size())));
    k = std::min(k, cms.size() - 1);
    const double times[] = {wrapped};
    const auto v = integrate_cm(p, orbit, cms[k], cms[k].time, times, opt.covariance);
    return residual_contangle(v.front().entries, t);
  });
}
}  // namespace magnomech
