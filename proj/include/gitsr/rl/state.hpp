#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gitsr/nn/gcn.hpp"
#include "gitsr/nn/qnetwork.hpp"
#include "gitsr/repr/graph.hpp"
#include "gitsr/repr/grid.hpp"

namespace gitsr::rl {

using nn::ModelVariant;

enum class Representation { AgentCentric, SceneCentric };

inline std::string to_string(Representation r) {
  return r == Representation::AgentCentric ? "agent_centric" : "scene_centric";
}

inline std::optional<Representation> parse_representation(const std::string& s) {
  if (s == "agent_centric") return Representation::AgentCentric;
  if (s == "scene_centric") return Representation::SceneCentric;
  return std::nullopt;
}

inline std::size_t sr_width(Representation r, const ScenarioConfig& c) {
  return c.n_lanes * (r == Representation::AgentCentric ? kGridCols : scene_centric_cols(c));
}

/// Network architecture for a variant/representation pair on a given scenario; everything else
/// keeps the defaults.
inline nn::NetworkConfig network_config(ModelVariant v, Representation r, const ScenarioConfig& c) {
  nn::NetworkConfig n;
  n.variant = v;
  n.transformer.input_width = sr_width(r, c);
  n.gcn.dims.front() = feature_width(c.n_lanes);
  return n;
}

/// Replay frames keep only what the observation builders read.
struct PackedVehicle {
  double x = 0.0;
  double v = 0.0;
  std::uint8_t lane = 0;
  std::uint8_t kind = 0;
  std::uint8_t active = 0;
  bool operator==(const PackedVehicle&) const = default;
};
using Frame = std::vector<PackedVehicle>;

inline Frame pack(const WorldState& w) {
  Frame f(w.vehicles.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& s = w.vehicles[i];
    f[i] = {s.x, s.v, static_cast<std::uint8_t>(s.lane), static_cast<std::uint8_t>(s.kind),
            static_cast<std::uint8_t>(s.active)};
  }
  return f;
}

/// Rebuilds a world carrying the observable fields of `f` (no rng, outcomes left Running).
inline WorldState unpack(const Frame& f) {
  WorldState w;
  w.vehicles.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto& s = w.vehicles[i];
    s.id = static_cast<std::uint32_t>(i);
    s.x = f[i].x;
    s.v = f[i].v;
    s.lane = f[i].lane;
    s.kind = static_cast<VehicleKind>(f[i].kind);
    s.active = f[i].active != 0;
  }
  return w;
}

/// Everything the Q-network sees at one tick.
struct StateSnapshot {
  Tensor<double> sr;         // m x sr_width
  Tensor<double> features;   // n x feature_width
  Tensor<double> adjacency;  // n x n raw 0/1, empty for the baseline variant
  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> cav_active;  // per CAV token
};

inline StateSnapshot build_state(const WorldState& w, ModelVariant variant, Representation rep,
                                 const ScenarioConfig& c) {
  StateSnapshot s;
  s.sr = rep == Representation::AgentCentric ? build_scene_representation(w, c).rows
                                             : build_scene_centric_representation(w, c).rows;
  if (variant != ModelVariant::MadqnTransformer) s.features = build_feature_matrix(w, c);
  if (variant == ModelVariant::Gitsr) s.adjacency = build_adjacency(w);
  s.mask = build_mask(w);
  for (auto id : cav_ids(w)) s.cav_active.push_back(w.vehicles[id].active ? 1 : 0);
  return s;
}

/// Stacks snapshots into one batched network input.
template <class T>
nn::NetworkInput<T> make_network_input(const std::vector<const StateSnapshot*>& states) {
  detail::require(!states.empty(), "make_network_input: empty batch");
  nn::NetworkInput<T> in;
  const auto& first = *states.front();
  in.batch = states.size();
  in.tokens = first.sr.rows();
  in.nodes = first.mask.size();
  in.sr = Tensor<T>(in.batch * in.tokens, first.sr.cols());
  const bool has_features = first.features.size() > 0, has_graph = first.adjacency.size() > 0;
  if (has_features) in.features = Tensor<T>(in.batch * in.nodes, first.features.cols());
  if (has_graph) in.adjacency = Tensor<T>(in.batch * in.nodes, in.nodes);
  for (std::size_t b = 0; b < in.batch; ++b) {
    const auto& s = *states[b];
    detail::require(s.sr.rows() == in.tokens && s.sr.cols() == in.sr.cols() && s.mask.size() == in.nodes,
                    "make_network_input: inconsistent snapshot shapes");
    std::transform(s.sr.values().begin(), s.sr.values().end(), in.sr.row(b * in.tokens),
                   [](double v) { return static_cast<T>(v); });
    if (has_features)
      std::transform(s.features.values().begin(), s.features.values().end(), in.features.row(b * in.nodes),
                     [](double v) { return static_cast<T>(v); });
    if (has_graph) {
      const auto a = nn::gcn_normalize<T>(s.adjacency);
      std::copy(a.values().begin(), a.values().end(), in.adjacency.row(b * in.nodes));
    }
    const auto rows = nn::masked_rows(s.mask, 1, in.tokens);
    for (auto r : rows) in.cav_rows.push_back(b * in.nodes + r);
  }
  return in;
}

}  // namespace gitsr::rl
