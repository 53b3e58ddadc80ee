#pragma once

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "gitsr/sim/idm.hpp"
#include "gitsr/sim/world.hpp"

namespace gitsr {

// Minimum acceleration gain (m/s^2) an HDV needs before it changes lane.
inline constexpr double kLaneChangeIncentive = 0.1;

inline double bumper_gap(double x_rear, double x_front, double length) { return x_front - x_rear - length; }

/// IDM acceleration vehicle `self` would get at position x in `lane`.
inline double idm_in_lane(const WorldState& w, const VehicleState& self, std::uint32_t lane,
                          const ScenarioConfig& c) {
  const VehicleState* lead = find_leader(w, lane, self.x, self.id);
  if (!lead) return idm_acceleration(self.v, kInfiniteGap, self.v, c.idm);
  return idm_acceleration(self.v, bumper_gap(self.x, lead->x, c.vehicle_length), lead->v, c.idm);
}

/// Rule-based HDV lateral decision: move to an adjacent lane only if it is safe for the new
/// follower and leader and improves IDM acceleration by at least kLaneChangeIncentive. Ties
/// prefer the rightmost candidate.
inline std::uint32_t hdv_lane_change(const WorldState& w, std::uint32_t vehicle_id, const ScenarioConfig& c) {
  const VehicleState& self = w.vehicles.at(vehicle_id);
  detail::require(self.active && self.kind == VehicleKind::Hdv, "hdv_lane_change: vehicle is not an active HDV");

  const double a_here = idm_in_lane(w, self, self.lane, c);
  std::uint32_t best_lane = self.lane;
  double best_gain = 0.0;
  // Right neighbour first so an exact tie keeps the rightmost lane.
  for (int delta : {+1, -1}) {
    const long cand = static_cast<long>(self.lane) + delta;
    if (cand < 1 || cand > static_cast<long>(c.n_lanes)) continue;
    const auto lane = static_cast<std::uint32_t>(cand);

    if (const VehicleState* rear = find_follower(w, lane, self.x, self.id)) {
      if (bumper_gap(rear->x, self.x, c.vehicle_length) < c.idm.s0 + rear->v * c.idm.T_headway) continue;
    }
    if (const VehicleState* front = find_leader(w, lane, self.x, self.id)) {
      if (bumper_gap(self.x, front->x, c.vehicle_length) < c.idm.s0) continue;
    }
    const double gain = idm_in_lane(w, self, lane, c) - a_here;
    if (gain >= kLaneChangeIncentive && gain > best_gain) {
      best_gain = gain;
      best_lane = lane;
    }
  }
  return best_lane;
}

inline double advance_speed(double v, double accel, double dt, double v_max) {
  return std::clamp(v + accel * dt, 0.0, v_max);
}

inline double command_acceleration(Longitudinal lon) {
  switch (lon) {
    case Longitudinal::AC: return kCavCommandAccel;
    case Longitudinal::MS: return 0.0;
    case Longitudinal::DC: return -kCavCommandAccel;
  }
  return 0.0;
}

inline std::uint32_t apply_lateral(std::uint32_t lane, Lateral lat, std::size_t n_lanes) {
  if (lat == Lateral::LC && lane > 1) return lane - 1;
  if (lat == Lateral::RC && lane < n_lanes) return lane + 1;
  return lane;
}

struct AppliedAction {
  VehicleState vehicle;
  bool ignored = false;  // set when the target was not an active CAV
};

/// Lateral move followed by the Euler longitudinal update of one CAV.
inline AppliedAction apply_action(const VehicleState& vehicle, ActionCommand action, const ScenarioConfig& c) {
  if (!vehicle.active || !is_cav(vehicle.kind)) return {vehicle, true};
  VehicleState out = vehicle;
  out.lane = apply_lateral(out.lane, action.lateral, c.n_lanes);
  out.v = advance_speed(out.v, command_acceleration(action.longitudinal), c.dt, c.v_max);
  out.x += out.v * c.dt;
  return {out, false};
}

/// Unordered same-lane overlaps between active vehicles involving at least one CAV, i < j.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> detect_collisions(const WorldState& w,
                                                                               const ScenarioConfig& c) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  const auto& vs = w.vehicles;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (!vs[i].active) continue;
    for (std::size_t j = i + 1; j < vs.size(); ++j) {
      if (!vs[j].active || vs[i].lane != vs[j].lane) continue;
      if (!is_cav(vs[i].kind) && !is_cav(vs[j].kind)) continue;
      if (std::abs(vs[i].x - vs[j].x) < c.vehicle_length) pairs.emplace_back(vs[i].id, vs[j].id);
    }
  }
  return pairs;
}

/// Exit bookkeeping after a longitudinal move from x_before. CAVs leave through a ramp when they
/// cross it in the rightmost lane; any vehicle reaching the road end leaves with ReachedEnd.
/// Returns the (possibly unchanged) outcome.
inline Outcome resolve_ramp_exit(VehicleState& v, double x_before, const ScenarioConfig& c) {
  if (!v.active) return v.outcome;
  auto crossed = [&](double ramp) { return x_before < ramp && ramp <= v.x; };
  if (is_cav(v.kind) && v.lane == c.n_lanes) {
    for (int ramp = 1; ramp <= 2; ++ramp) {
      if (!crossed(ramp == 1 ? c.ramp1_x : c.ramp2_x)) continue;
      const bool own = (ramp == 1) == (v.kind == VehicleKind::CavRamp1);
      v.outcome = own ? Outcome::ExitedCorrectRamp : Outcome::ExitedWrongRamp;
      v.active = false;
      return v.outcome;
    }
  }
  if (v.x >= c.road_length) {
    v.x = c.road_length;
    v.outcome = Outcome::ReachedEnd;
    v.active = false;
  }
  return v.outcome;
}

struct StepEvents {
  std::vector<std::pair<std::uint32_t, Outcome>> exits;  // ramp exits and road-end arrivals
  std::vector<std::pair<std::uint32_t, std::uint32_t>> collisions;
  std::size_t ignored_actions = 0;  // commands addressed to inactive CAVs
};

/// Advances the world by one tick. `actions` holds one command per CAV in cav_ids() order;
/// commands for CAVs that are no longer active are ignored.
inline StepEvents step(WorldState& w, std::span<const ActionCommand> actions, const ScenarioConfig& c) {
  const auto cavs = cav_ids(w);
  detail::require(actions.size() == cavs.size(), "step: expected " + std::to_string(cavs.size()) +
                                                     " actions, got " + std::to_string(actions.size()));
  StepEvents ev;
  auto& vs = w.vehicles;

  // (1) HDV lane changes, sequential in id order against the partially updated world.
  for (auto& v : vs)
    if (v.active && v.kind == VehicleKind::Hdv) v.lane = hdv_lane_change(w, v.id, c);

  // (2) CAV lateral moves.
  for (std::size_t k = 0; k < cavs.size(); ++k) {
    auto& v = vs[cavs[k]];
    if (!v.active) {
      ++ev.ignored_actions;
      continue;
    }
    v.lane = apply_lateral(v.lane, actions[k].lateral, c.n_lanes);
  }

  // (3) HDV accelerations against post-lane-change leaders.
  std::vector<double> accel(vs.size(), 0.0);
  for (auto& v : vs)
    if (v.active && v.kind == VehicleKind::Hdv) accel[v.id] = idm_in_lane(w, v, v.lane, c);
  for (std::size_t k = 0; k < cavs.size(); ++k) accel[cavs[k]] = command_acceleration(actions[k].longitudinal);

  // (4) Euler updates, (5) exits.
  std::vector<double> x_before(vs.size());
  for (auto& v : vs) {
    x_before[v.id] = v.x;
    if (!v.active) continue;
    v.v = advance_speed(v.v, accel[v.id], c.dt, c.v_max);
    v.x += v.v * c.dt;
  }
  for (auto& v : vs) {
    if (!v.active) continue;
    if (resolve_ramp_exit(v, x_before[v.id], c) != Outcome::Running) ev.exits.emplace_back(v.id, v.outcome);
  }

  // (6) collisions: colliding CAVs leave the road.
  ev.collisions = detect_collisions(w, c);
  for (const auto& [a, b] : ev.collisions) {
    for (auto id : {a, b}) {
      auto& v = vs[id];
      if (is_cav(v.kind)) {
        v.active = false;
        v.outcome = Outcome::Collided;
      }
    }
  }
  w.collision_count_episode += ev.collisions.size();

  // (7)
  ++w.step_index;
  return ev;
}

inline bool episode_done(const WorldState& w, const ScenarioConfig& c) {
  if (w.step_index >= c.max_steps) return true;
  return std::none_of(w.vehicles.begin(), w.vehicles.end(), [](const auto& v) { return v.active && is_cav(v.kind); });
}

}  // namespace gitsr
