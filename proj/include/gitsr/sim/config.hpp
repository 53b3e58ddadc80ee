#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gitsr/error.hpp"

namespace gitsr {

using Json = nlohmann::json;

namespace json_util {

// Rejects any key of `obj` not in `allowed`; silent typos in experiment files are worse than a crash.
inline void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || (a == key);
    if (!known) throw ConfigError(where + "." + key + ": unknown key");
  }
}

template <class V>
void read_field(const Json& obj, const char* key, V& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;  // keep default
  try {
    out = it->template get<V>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

}  // namespace json_util

/// Car-following parameters of the Intelligent Driver Model.
struct IdmParams {
  double a_max = 1.5;      // m/s^2
  double b_comf = 2.0;     // m/s^2
  double v0 = 25.0;        // m/s
  double T_headway = 1.0;  // s
  double s0 = 2.0;         // m
  double delta = 4.0;

  bool operator==(const IdmParams&) const = default;
};

/// Road geometry, traffic mix and timing of one highway scenario.
struct ScenarioConfig {
  std::size_t n_cav = 4;
  std::size_t n_hdv = 10;
  double v_max = 25.0;
  double road_length = 400.0;
  std::size_t n_lanes = 3;
  double ramp1_x = 250.0;
  double ramp2_x = 370.0;
  double dt = 0.5;
  double hdv_depart_speed = 5.0;
  double cav_depart_speed = 10.0;
  double vehicle_length = 5.0;
  std::size_t max_steps = 160;
  IdmParams idm{};

  bool operator==(const ScenarioConfig&) const = default;

  std::size_t n_vehicles() const { return n_cav + n_hdv; }
};

// Longitudinal command magnitude for AC / DC actions.
inline constexpr double kCavCommandAccel = 2.0;
// Vehicles are spawned inside [0, kSpawnRegion] metres.
inline constexpr double kSpawnRegion = 80.0;

inline void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& f, const std::string& why) { throw ConfigError("scenario." + f + ": " + why); };
  if (!(c.dt > 0)) fail("dt", "must be > 0");
  if (c.n_lanes < 2) fail("n_lanes", "must be >= 2");
  if (!(c.v_max > 0)) fail("v_max", "must be > 0");
  if (!(c.road_length > 0)) fail("road_length", "must be > 0");
  if (!(c.ramp1_x > 0 && c.ramp1_x < c.ramp2_x)) fail("ramp1_x", "must satisfy 0 < ramp1_x < ramp2_x");
  if (!(c.ramp2_x < c.road_length)) fail("ramp2_x", "must be < road_length");
  if (!(c.vehicle_length > 0)) fail("vehicle_length", "must be > 0");
  if (c.max_steps == 0) fail("max_steps", "must be > 0");
  if (c.hdv_depart_speed < 0 || c.hdv_depart_speed > c.v_max) fail("hdv_depart_speed", "must lie in [0, v_max]");
  if (c.cav_depart_speed < 0 || c.cav_depart_speed > c.v_max) fail("cav_depart_speed", "must lie in [0, v_max]");
  const auto& p = c.idm;
  if (!(p.a_max > 0)) fail("idm.a_max", "must be > 0");
  if (!(p.b_comf > 0)) fail("idm.b_comf", "must be > 0");
  if (!(p.v0 > 0)) fail("idm.v0", "must be > 0");
  if (p.v0 > c.v_max) fail("idm.v0", "must be <= v_max");
  if (!(p.T_headway > 0)) fail("idm.T_headway", "must be > 0");
  if (!(p.s0 > 0)) fail("idm.s0", "must be > 0");
  if (!(p.delta > 0)) fail("idm.delta", "must be > 0");
}

inline Json to_json(const IdmParams& p) {
  return Json{{"a_max", p.a_max}, {"b_comf", p.b_comf}, {"v0", p.v0},
              {"T_headway", p.T_headway}, {"s0", p.s0}, {"delta", p.delta}};
}

inline Json to_json(const ScenarioConfig& c) {
  return Json{{"n_cav", c.n_cav},
              {"n_hdv", c.n_hdv},
              {"v_max", c.v_max},
              {"road_length", c.road_length},
              {"n_lanes", c.n_lanes},
              {"ramp1_x", c.ramp1_x},
              {"ramp2_x", c.ramp2_x},
              {"dt", c.dt},
              {"hdv_depart_speed", c.hdv_depart_speed},
              {"cav_depart_speed", c.cav_depart_speed},
              {"vehicle_length", c.vehicle_length},
              {"max_steps", c.max_steps},
              {"idm", to_json(c.idm)}};
}

inline IdmParams idm_from_json(const Json& j, const std::string& where = "scenario.idm") {
  using namespace json_util;
  reject_unknown_keys(j, {"a_max", "b_comf", "v0", "T_headway", "s0", "delta"}, where);
  IdmParams p;
  read_field(j, "a_max", p.a_max, where);
  read_field(j, "b_comf", p.b_comf, where);
  read_field(j, "v0", p.v0, where);
  read_field(j, "T_headway", p.T_headway, where);
  read_field(j, "s0", p.s0, where);
  read_field(j, "delta", p.delta, where);
  return p;
}

/// Parses and validates a scenario document. Missing keys keep their defaults.
inline ScenarioConfig scenario_from_json(const Json& j, const std::string& where = "scenario") {
  using namespace json_util;
  reject_unknown_keys(j,
                      {"n_cav", "n_hdv", "v_max", "road_length", "n_lanes", "ramp1_x", "ramp2_x", "dt",
                       "hdv_depart_speed", "cav_depart_speed", "vehicle_length", "max_steps", "idm"},
                      where);
  ScenarioConfig c;
  read_field(j, "n_cav", c.n_cav, where);
  read_field(j, "n_hdv", c.n_hdv, where);
  read_field(j, "v_max", c.v_max, where);
  read_field(j, "road_length", c.road_length, where);
  read_field(j, "n_lanes", c.n_lanes, where);
  read_field(j, "ramp1_x", c.ramp1_x, where);
  read_field(j, "ramp2_x", c.ramp2_x, where);
  read_field(j, "dt", c.dt, where);
  read_field(j, "hdv_depart_speed", c.hdv_depart_speed, where);
  read_field(j, "cav_depart_speed", c.cav_depart_speed, where);
  read_field(j, "vehicle_length", c.vehicle_length, where);
  read_field(j, "max_steps", c.max_steps, where);
  if (auto it = j.find("idm"); it != j.end()) c.idm = idm_from_json(*it, where + ".idm");
  validate(c);
  return c;
}

}  // namespace gitsr
