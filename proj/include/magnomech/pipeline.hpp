#pragma once

// End-to-end evaluation of one parameter point:
// mean field -> fluctuation stability -> periodic steady state -> entanglement.

#include <cstddef>
#include <optional>

#include "magnomech/entanglement.hpp"
#include "magnomech/fluctuations.hpp"
#include "magnomech/meanfield.hpp"
#include "magnomech/params.hpp"

namespace magnomech {

struct PipelineOptions {
  OrbitOptions orbit{};
  PeriodOptions period{};
  std::size_t stability_phases = 64;
};

struct PointAnalysis {
  MeanTrajectory orbit;
  StabilityReport stability;
  /// Absent when the Floquet criterion fails. A Routh-Hurwitz violation at
  /// some phase of a Floquet-stable orbit is reported but does not suppress it.
  std::optional<PeriodSummary> summary;

  double max_abs_a() const { return orbit.max_abs_a(); }
};

/// Throws magnomech::Error for invalid parameters or when the mean field has
/// no stable fixed point / periodic orbit. Fluctuation instabilities are
/// reported through `stability` rather than thrown.
inline PointAnalysis analyze_point(const SystemParams& p, const PipelineOptions& opt = {}) {
  validate(p);
  PointAnalysis out;
  out.orbit = steady_meanfield(p, opt.orbit);
  out.stability = assess_stability(p, out.orbit, opt.stability_phases, opt.period.covariance);
  if (out.stability.steady_state_exists()) {
    out.summary = max_over_period(p, out.orbit, opt.period, out.stability.monodromy);
  }
  return out;
}

}  // namespace magnomech
