#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "gitsr/error.hpp"

namespace gitsr {

enum class VehicleKind : std::uint8_t { Hdv, CavRamp1, CavRamp2 };

enum class Outcome : std::uint8_t { Running, ExitedCorrectRamp, ExitedWrongRamp, ReachedEnd, Collided };

inline bool is_cav(VehicleKind k) { return k != VehicleKind::Hdv; }

inline std::string_view to_string(VehicleKind k) {
  switch (k) {
    case VehicleKind::Hdv: return "HDV";
    case VehicleKind::CavRamp1: return "CAV_RAMP1";
    case VehicleKind::CavRamp2: return "CAV_RAMP2";
  }
  return "?";
}

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Running: return "Running";
    case Outcome::ExitedCorrectRamp: return "ExitedCorrectRamp";
    case Outcome::ExitedWrongRamp: return "ExitedWrongRamp";
    case Outcome::ReachedEnd: return "ReachedEnd";
    case Outcome::Collided: return "Collided";
  }
  return "?";
}

/// One vehicle on the main road. Lanes are numbered 1..n_lanes, n_lanes being the rightmost
/// (exit) lane.
struct VehicleState {
  std::uint32_t id = 0;
  VehicleKind kind = VehicleKind::Hdv;
  std::uint32_t lane = 1;
  double x = 0.0;
  double v = 0.0;
  bool active = true;
  Outcome outcome = Outcome::Running;

  bool operator==(const VehicleState&) const = default;
};

enum class Lateral : std::uint8_t { LC, LK, RC };        // change left, keep, change right
enum class Longitudinal : std::uint8_t { AC, MS, DC };   // accelerate, maintain, decelerate

inline constexpr int kNumActions = 9;

struct ActionCommand {
  Lateral lateral = Lateral::LK;
  Longitudinal longitudinal = Longitudinal::MS;

  bool operator==(const ActionCommand&) const = default;

  /// index = 3 * lateral + longitudinal
  static ActionCommand decode(int index) {
    detail::require(index >= 0 && index < kNumActions, "action index out of range 0..8");
    return {static_cast<Lateral>(index / 3), static_cast<Longitudinal>(index % 3)};
  }
  int encode() const { return 3 * static_cast<int>(lateral) + static_cast<int>(longitudinal); }
};

// Placeholder command recorded for CAVs that are no longer on the road.
inline constexpr ActionCommand kIdleAction{Lateral::LK, Longitudinal::MS};

}  // namespace gitsr
