#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gitsr/rl/trainer.hpp"
#include "gitsr/sim/config.hpp"

namespace gitsr::harness {

using rl::Representation;
using rl::TrainingConfig;
using nn::ModelVariant;

struct ExperimentConfig {
  ScenarioConfig scenario{};
  ModelVariant variant = ModelVariant::Gitsr;
  Representation representation = Representation::AgentCentric;
  TrainingConfig training{};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string output_dir = "runs/default";
  bool record_timing = true;  // false writes wall_ms = 0 so reruns are byte-identical

  bool operator==(const ExperimentConfig&) const = default;
};

inline void validate(const ExperimentConfig& e) {
  validate(e.scenario);
  const auto& t = e.training;
  auto fail = [](const std::string& f, const std::string& why) { throw ConfigError("training." + f + ": " + why); };
  if (t.episodes == 0) fail("episodes", "must be > 0");
  if (t.batch == 0) fail("batch", "must be > 0");
  if (t.replay_capacity < t.batch) fail("replay_capacity", "must be >= batch");
  if (!(t.lr > 0)) fail("lr", "must be > 0");
  if (!(t.gamma >= 0 && t.gamma <= 1)) fail("gamma", "must lie in [0, 1]");
  if (!(t.epsilon.end >= 0 && t.epsilon.end <= t.epsilon.start && t.epsilon.start <= 1))
    fail("epsilon", "need 0 <= end <= start <= 1");
  if (!(t.weights.speed > 0 && t.weights.collision > 0 && t.weights.intention > 0))
    fail("weights", "all weights must be > 0");
  if (t.target_update_every == 0) fail("target_update_every", "must be > 0");
  if (!(t.grad_clip > 0)) fail("grad_clip", "must be > 0");
  if (e.seeds.empty()) throw ConfigError("seeds: must be a non-empty list");
  if (e.output_dir.empty()) throw ConfigError("output_dir: must not be empty");
}

inline Json to_json(const TrainingConfig& t) {
  return Json{{"episodes", t.episodes},
              {"warmup_steps", t.warmup_steps},
              {"batch", t.batch},
              {"lr", t.lr},
              {"gamma", t.gamma},
              {"epsilon", {{"start", t.epsilon.start}, {"end", t.epsilon.end}, {"decay_steps", t.epsilon.decay_steps}}},
              {"weights",
               {{"speed", t.weights.speed}, {"collision", t.weights.collision}, {"intention", t.weights.intention}}},
              {"target_update_every", t.target_update_every},
              {"grad_clip", t.grad_clip},
              {"replay_capacity", t.replay_capacity},
              {"checkpoint_every", t.checkpoint_every}};
}

inline Json to_json(const ExperimentConfig& e) {
  return Json{{"scenario", to_json(e.scenario)},
              {"model_variant", nn::to_string(e.variant)},
              {"representation", rl::to_string(e.representation)},
              {"training", to_json(e.training)},
              {"seeds", e.seeds},
              {"output_dir", e.output_dir},
              {"record_timing", e.record_timing}};
}

inline TrainingConfig training_from_json(const Json& j) {
  using namespace json_util;
  const std::string w = "training";
  reject_unknown_keys(j, {"episodes", "warmup_steps", "batch", "lr", "gamma", "epsilon", "weights",
                          "target_update_every", "grad_clip", "replay_capacity", "checkpoint_every"},
                      w);
  TrainingConfig t;
  read_field(j, "episodes", t.episodes, w);
  read_field(j, "warmup_steps", t.warmup_steps, w);
  read_field(j, "batch", t.batch, w);
  read_field(j, "lr", t.lr, w);
  read_field(j, "gamma", t.gamma, w);
  read_field(j, "target_update_every", t.target_update_every, w);
  read_field(j, "grad_clip", t.grad_clip, w);
  read_field(j, "replay_capacity", t.replay_capacity, w);
  read_field(j, "checkpoint_every", t.checkpoint_every, w);
  if (auto it = j.find("epsilon"); it != j.end()) {
    reject_unknown_keys(*it, {"start", "end", "decay_steps"}, w + ".epsilon");
    read_field(*it, "start", t.epsilon.start, w + ".epsilon");
    read_field(*it, "end", t.epsilon.end, w + ".epsilon");
    read_field(*it, "decay_steps", t.epsilon.decay_steps, w + ".epsilon");
  }
  if (auto it = j.find("weights"); it != j.end()) {
    reject_unknown_keys(*it, {"speed", "collision", "intention"}, w + ".weights");
    read_field(*it, "speed", t.weights.speed, w + ".weights");
    read_field(*it, "collision", t.weights.collision, w + ".weights");
    read_field(*it, "intention", t.weights.intention, w + ".weights");
  }
  return t;
}

inline Json read_json_file(const std::filesystem::path& p, const std::string& what) {
  std::ifstream in(p);
  if (!in) throw ConfigError(what + ": cannot open " + p.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(what + ": " + p.string() + " is not valid JSON (" + e.what() + ")");
  }
}

/// `base_dir` resolves a scenario given as a relative file path.
inline ExperimentConfig experiment_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  using namespace json_util;
  reject_unknown_keys(j, {"scenario", "model_variant", "representation", "training", "seeds", "output_dir",
                          "record_timing"},
                      "config");
  ExperimentConfig e;
  if (auto it = j.find("scenario"); it != j.end()) {
    if (it->is_string()) {
      std::filesystem::path p = it->get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      e.scenario = scenario_from_json(read_json_file(p, "scenario"));
    } else {
      e.scenario = scenario_from_json(*it);
    }
  }
  if (auto it = j.find("model_variant"); it != j.end()) {
    const auto v = it->is_string() ? nn::parse_variant(it->get<std::string>()) : std::nullopt;
    if (!v) throw ConfigError("model_variant: expected one of gitsr, madqn_transformer, madqn");
    e.variant = *v;
  }
  if (auto it = j.find("representation"); it != j.end()) {
    const auto r = it->is_string() ? rl::parse_representation(it->get<std::string>()) : std::nullopt;
    if (!r) throw ConfigError("representation: expected agent_centric or scene_centric");
    e.representation = *r;
  }
  if (auto it = j.find("training"); it != j.end()) e.training = training_from_json(*it);
  read_field(j, "seeds", e.seeds, "config");
  read_field(j, "output_dir", e.output_dir, "config");
  read_field(j, "record_timing", e.record_timing, "config");
  validate(e);
  return e;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return experiment_from_json(read_json_file(path, "config"), path.parent_path());
}

}  // namespace gitsr::harness
