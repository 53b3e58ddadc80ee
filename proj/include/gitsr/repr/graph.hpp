#pragma once

#include <cmath>
#include <ostream>
#include <vector>

#include "gitsr/csv.hpp"
#include "gitsr/repr/grid.hpp"

namespace gitsr {

// Column layout of the node feature matrix: X, V, L, I, H_1..H_lanes, T_1..T_lanes.
inline std::size_t feature_width(std::size_t n_lanes) { return 4 + 2 * n_lanes; }

inline double category_code(VehicleKind k) {
  switch (k) {
    case VehicleKind::CavRamp1: return 1.0;
    case VehicleKind::CavRamp2: return 2.0;
    case VehicleKind::Hdv: return 3.0;
  }
  return 0.0;
}

/// Node features for every vehicle (row = id). Headways are center-to-center distances to the
/// nearest vehicle strictly ahead (H) or behind (T) in each lane, normalised by road length;
/// an empty direction reads 1. Inactive vehicles have zero rows.
inline Tensor<double> build_feature_matrix(const WorldState& w, const ScenarioConfig& c) {
  const std::size_t lanes = c.n_lanes;
  Tensor<double> n(w.vehicles.size(), feature_width(lanes));
  for (const auto& v : w.vehicles) {
    if (!v.active) continue;
    double* r = n.row(v.id);
    r[0] = v.x / c.road_length;
    r[1] = v.v / c.v_max;
    r[2] = static_cast<double>(v.lane);
    r[3] = category_code(v.kind);
    for (std::uint32_t lane = 1; lane <= lanes; ++lane) {
      const VehicleState* lead = find_leader(w, lane, v.x, v.id, /*strict=*/true);
      const VehicleState* follow = find_follower(w, lane, v.x, v.id);
      r[4 + lane - 1] = lead ? (lead->x - v.x) / c.road_length : 1.0;
      r[4 + lanes + lane - 1] = follow ? (v.x - follow->x) / c.road_length : 1.0;
    }
  }
  return n;
}

/// Binary interaction graph: all active CAV pairs, CAV-HDV pairs within `radius`, and a
/// self-loop on every vehicle (inactive ones included) so the degree matrix stays invertible.
inline Tensor<double> build_adjacency(const WorldState& w, double radius = kPerceptionRadius) {
  const std::size_t n = w.vehicles.size();
  Tensor<double> e(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    e(i, i) = 1.0;
    const auto& a = w.vehicles[i];
    if (!a.active || !is_cav(a.kind)) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& b = w.vehicles[j];
      if (j == i || !b.active) continue;
      if (is_cav(b.kind) || std::abs(a.x - b.x) <= radius) {
        e(i, j) = 1.0;
        e(j, i) = 1.0;
      }
    }
  }
  return e;
}

/// 1 at CAV rows regardless of whether the CAV is still on the road.
inline std::vector<std::uint8_t> build_mask(const WorldState& w) {
  std::vector<std::uint8_t> m(w.vehicles.size(), 0);
  for (const auto& v : w.vehicles) m[v.id] = is_cav(v.kind) ? 1 : 0;
  return m;
}

/// Row-major CSV dump, 6 significant digits, for eyeballing grids and matrices.
template <class T>
void dump_csv(std::ostream& os, const Tensor<T>& t) {
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cols(); ++c) {
      if (c) os << ',';
      os << csv::sig(static_cast<double>(t(r, c)));
    }
    os << '\n';
  }
}

}  // namespace gitsr
