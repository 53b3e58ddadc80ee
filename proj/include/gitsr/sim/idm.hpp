#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "gitsr/sim/config.hpp"

namespace gitsr {

inline constexpr double kInfiniteGap = std::numeric_limits<double>::infinity();

// Physical braking limit applied to the raw IDM output.
inline constexpr double kIdmMaxDecel = 9.0;

/// Desired dynamic gap s*(v, dv). The dynamic part is floored at zero so a faster leader never
/// shrinks it below s0.
inline double idm_desired_gap(double v, double v_leader, const IdmParams& p) {
  const double dv = v - v_leader;
  return p.s0 + std::max(0.0, v * p.T_headway + v * dv / (2.0 * std::sqrt(p.a_max * p.b_comf)));
}

/// IDM acceleration for a follower at speed `v` with bumper gap `gap` (may be kInfiniteGap) to a
/// leader moving at `v_leader`. Output is clamped to [-kIdmMaxDecel, a_max].
inline double idm_acceleration(double v, double gap, double v_leader, const IdmParams& p) {
  const double free_term = std::pow(v / p.v0, p.delta);
  double interaction = 0.0;
  if (std::isfinite(gap)) {
    const double g = std::max(gap, 1e-3);
    const double ratio = idm_desired_gap(v, v_leader, p) / g;
    interaction = ratio * ratio;
  }
  const double a = p.a_max * (1.0 - free_term - interaction);
  return std::clamp(a, -kIdmMaxDecel, p.a_max);
}

/// Steady-state bumper gap of a homogeneous platoon at speed v < v0.
inline double idm_equilibrium_gap(double v, const IdmParams& p) {
  return idm_desired_gap(v, v, p) / std::sqrt(1.0 - std::pow(v / p.v0, p.delta));
}

}  // namespace gitsr
