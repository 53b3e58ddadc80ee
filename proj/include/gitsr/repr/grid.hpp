#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gitsr/sim/world.hpp"
#include "gitsr/tensor.hpp"

namespace gitsr {

inline constexpr double kPerceptionRadius = 50.0;  // m, front and rear
inline constexpr double kCellSize = 2.0;           // m
inline constexpr std::size_t kGridCols = 51;       // 2 * radius / cell + 1
inline constexpr std::size_t kCenterCol = 25;

/// Speed-coded occupancy: 0 is empty, a stationary vehicle is 0.2, v_max is 1.
inline double occupancy_value(double v, double v_max) { return 0.2 + 0.8 * (v / v_max); }

/// Agent-centric n_lanes x 51 occupancy grid around one CAV.
struct LocalGrid {
  Tensor<double> values;
  std::uint32_t owner_cav = 0;
};

inline LocalGrid build_local_grid(const WorldState& w, std::uint32_t cav_id, const ScenarioConfig& c) {
  LocalGrid g{Tensor<double>(c.n_lanes, kGridCols), cav_id};
  const VehicleState& ego = w.vehicles.at(cav_id);
  if (!ego.active) return g;

  // Distance of the current occupant of each cell; the nearer vehicle keeps the cell.
  std::vector<double> occupant_dist(c.n_lanes * kGridCols, std::numeric_limits<double>::infinity());
  auto place = [&](const VehicleState& v, double dx) {
    const long col = static_cast<long>(kCenterCol) + std::lround(dx / kCellSize);
    if (col < 0 || col >= static_cast<long>(kGridCols)) return;
    const std::size_t idx = (v.lane - 1) * kGridCols + static_cast<std::size_t>(col);
    const double dist = std::abs(dx);
    if (!(dist < occupant_dist[idx])) return;
    occupant_dist[idx] = dist;
    g.values.data()[idx] = occupancy_value(v.v, c.v_max);
  };
  place(ego, 0.0);
  occupant_dist[(ego.lane - 1) * kGridCols + kCenterCol] = -1.0;  // ego cell is never overwritten
  for (const auto& o : w.vehicles) {
    if (!o.active || o.id == ego.id) continue;
    const double dx = o.x - ego.x;
    if (std::abs(dx) <= kPerceptionRadius) place(o, dx);
  }
  return g;
}

/// One row per CAV (fixed id order): the flattened state of that CAV's view of the road.
struct SceneRepresentation {
  Tensor<double> rows;
  std::vector<std::uint32_t> cav_order;
};

inline SceneRepresentation build_scene_representation(const WorldState& w, const ScenarioConfig& c) {
  SceneRepresentation sr;
  sr.cav_order = cav_ids(w);
  sr.rows = Tensor<double>(sr.cav_order.size(), c.n_lanes * kGridCols);
  for (std::size_t i = 0; i < sr.cav_order.size(); ++i) {
    const auto g = build_local_grid(w, sr.cav_order[i], c);
    std::copy(g.values.values().begin(), g.values.values().end(), sr.rows.row(i));
  }
  return sr;
}

inline std::size_t scene_centric_cols(const ScenarioConfig& c) {
  return static_cast<std::size_t>(std::lround(c.road_length / kCellSize)) + 1;
}

/// Global n_lanes x (road/2 + 1) grid in road coordinates. HDV cells carry the positive
/// occupancy value, CAV cells its negation. When two vehicles share a cell the lower id keeps it.
inline Tensor<double> build_scene_centric_grid(const WorldState& w, const ScenarioConfig& c) {
  const std::size_t cols = scene_centric_cols(c);
  Tensor<double> g(c.n_lanes, cols);
  std::vector<bool> taken(g.size(), false);
  for (const auto& v : w.vehicles) {
    if (!v.active) continue;
    const long col = std::lround(v.x / kCellSize);
    if (col < 0 || col >= static_cast<long>(cols)) continue;
    const std::size_t idx = (v.lane - 1) * cols + static_cast<std::size_t>(col);
    if (taken[idx]) continue;
    taken[idx] = true;
    const double val = occupancy_value(v.v, c.v_max);
    g.data()[idx] = is_cav(v.kind) ? -val : val;
  }
  return g;
}

/// Scene-centric counterpart of build_scene_representation: every active CAV row holds the same
/// flattened global grid, inactive CAV rows are zero.
inline SceneRepresentation build_scene_centric_representation(const WorldState& w, const ScenarioConfig& c) {
  SceneRepresentation sr;
  sr.cav_order = cav_ids(w);
  const auto grid = build_scene_centric_grid(w, c);
  sr.rows = Tensor<double>(sr.cav_order.size(), grid.size());
  for (std::size_t i = 0; i < sr.cav_order.size(); ++i) {
    if (!w.vehicles[sr.cav_order[i]].active) continue;
    std::copy(grid.values().begin(), grid.values().end(), sr.rows.row(i));
  }
  return sr;
}

}  // namespace gitsr
