#pragma once

#include <ostream>
#include <string>

#include "gitsr/csv.hpp"
#include "gitsr/sim/world.hpp"

namespace gitsr {

inline constexpr std::string_view kTraceHeader = "step,id,kind,lane,x,v,active,outcome";

/// Trace columns for one vehicle at the world's current step, without a line terminator.
inline std::string trace_row(const WorldState& w, const VehicleState& v) {
  std::string row = std::to_string(w.step_index);
  row += ',' + std::to_string(v.id) + ',' + std::string(to_string(v.kind)) + ',' + std::to_string(v.lane) + ',' +
         csv::num(v.x) + ',' + csv::num(v.v) + ',' + (v.active ? "1" : "0") + ',' + std::string(to_string(v.outcome));
  return row;
}

inline void write_trace_rows(std::ostream& os, const WorldState& w) {
  for (const auto& v : w.vehicles) os << trace_row(w, v) << '\n';
}

}  // namespace gitsr
