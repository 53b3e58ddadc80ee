#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gitsr/sim/config.hpp"
#include "gitsr/sim/vehicle.hpp"

namespace gitsr {

struct WorldState {
  std::size_t step_index = 0;
  std::vector<VehicleState> vehicles;  // index == id
  std::size_t collision_count_episode = 0;
  std::mt19937_64 rng;

  bool operator==(const WorldState&) const = default;

  std::size_t active_count() const {
    return static_cast<std::size_t>(std::count_if(vehicles.begin(), vehicles.end(), [](const auto& v) { return v.active; }));
  }
};

/// Ids of all CAVs in id order; this is the fixed token order for the learner.
inline std::vector<std::uint32_t> cav_ids(const WorldState& w) {
  std::vector<std::uint32_t> ids;
  for (const auto& v : w.vehicles)
    if (is_cav(v.kind)) ids.push_back(v.id);
  return ids;
}

inline std::size_t spawn_slots_per_lane(const ScenarioConfig& c) {
  return static_cast<std::size_t>(std::floor(kSpawnRegion / (c.idm.s0 + c.vehicle_length)));
}

/// Places n_cav CAVs (ids 0..n_cav-1, alternating first/second-ramp task) followed by n_hdv HDVs
/// on randomly drawn (lane, slot) pairs of the spawn region.
inline WorldState reset(const ScenarioConfig& config, std::uint64_t seed) {
  validate(config);
  const std::size_t per_lane = spawn_slots_per_lane(config);
  const std::size_t capacity = per_lane * config.n_lanes;
  if (config.n_vehicles() > capacity)
    throw ConfigError("scenario: " + std::to_string(config.n_vehicles()) + " vehicles exceed spawn capacity " +
                      std::to_string(capacity) + " (" + std::to_string(per_lane) + " per lane)");

  WorldState w;
  w.rng.seed(seed);
  std::vector<std::size_t> slots(capacity);
  std::iota(slots.begin(), slots.end(), std::size_t{0});
  // Partial Fisher-Yates with explicit draws so the layout does not depend on std::shuffle's
  // library-specific algorithm.
  for (std::size_t i = 0; i < config.n_vehicles(); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(w.rng() % (capacity - i));
    std::swap(slots[i], slots[j]);
  }
  const double spacing = config.idm.s0 + config.vehicle_length;
  w.vehicles.reserve(config.n_vehicles());
  for (std::size_t i = 0; i < config.n_vehicles(); ++i) {
    VehicleState v;
    v.id = static_cast<std::uint32_t>(i);
    if (i < config.n_cav) {
      v.kind = (i % 2 == 0) ? VehicleKind::CavRamp1 : VehicleKind::CavRamp2;
      v.v = config.cav_depart_speed;
    } else {
      v.kind = VehicleKind::Hdv;
      v.v = config.hdv_depart_speed;
    }
    const std::size_t lane_idx = slots[i] / per_lane;
    const std::size_t slot = slots[i] % per_lane;
    v.lane = static_cast<std::uint32_t>(lane_idx + 1);
    v.x = (static_cast<double>(slot) + 0.5) * spacing;
    w.vehicles.push_back(v);
  }
  return w;
}

/// Nearest active vehicle in `lane` ahead of position x (x_j >= x, or x_j > x when `strict`),
/// ignoring `self`.
inline const VehicleState* find_leader(const WorldState& w, std::uint32_t lane, double x, std::uint32_t self,
                                       bool strict = false) {
  const VehicleState* best = nullptr;
  for (const auto& o : w.vehicles) {
    if (!o.active || o.id == self || o.lane != lane) continue;
    if (strict ? !(o.x > x) : !(o.x >= x)) continue;
    if (!best || o.x < best->x) best = &o;
  }
  return best;
}

/// Nearest active vehicle in `lane` strictly behind position x, ignoring `self`.
inline const VehicleState* find_follower(const WorldState& w, std::uint32_t lane, double x, std::uint32_t self) {
  const VehicleState* best = nullptr;
  for (const auto& o : w.vehicles) {
    if (!o.active || o.id == self || o.lane != lane) continue;
    if (!(o.x < x)) continue;
    if (!best || o.x > best->x) best = &o;
  }
  return best;
}

}  // namespace gitsr
