#pragma once

#include "gitsr/sim/dynamics.hpp"

namespace gitsr::rl {

inline constexpr double kIntentionZone = 50.0;  // m before the target ramp, rightmost lane

struct RewardWeights {
  double speed = 3.0;
  double collision = 9.0;
  double intention = 15.0;
  bool operator==(const RewardWeights&) const = default;
};

struct RewardBreakdown {
  double speed = 0.0;      // mean v / v_max over CAVs active after the step
  double collision = 0.0;  // minus the collisions of this step
  double intention = 0.0;  // sum of (1 - I/50) over CAVs inside their own zone
  double total = 0.0;
};

inline double target_ramp(VehicleKind k, const ScenarioConfig& c) {
  return k == VehicleKind::CavRamp1 ? c.ramp1_x : c.ramp2_x;
}

/// Shared team reward for the step that produced `events` and left the world in `after`.
inline RewardBreakdown compute_reward(const WorldState& after, const StepEvents& events, const RewardWeights& wts,
                                      const ScenarioConfig& c) {
  RewardBreakdown r;
  std::size_t active = 0;
  for (const auto& v : after.vehicles) {
    if (!v.active || !is_cav(v.kind)) continue;
    ++active;
    r.speed += v.v / c.v_max;
    const double dist = target_ramp(v.kind, c) - v.x;
    if (v.lane == c.n_lanes && dist >= 0.0 && dist <= kIntentionZone) r.intention += 1.0 - dist / kIntentionZone;
  }
  if (active) r.speed /= static_cast<double>(active);
  r.collision = -static_cast<double>(events.collisions.size());
  r.total = wts.speed * r.speed + wts.collision * r.collision + wts.intention * r.intention;
  return r;
}

}  // namespace gitsr::rl
