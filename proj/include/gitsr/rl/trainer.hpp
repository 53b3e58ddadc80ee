#pragma once

#include <chrono>
#include <functional>
#include <random>
#include <vector>

#include "gitsr/rl/dqn.hpp"
#include "gitsr/rl/epsilon.hpp"
#include "gitsr/rl/reward.hpp"

namespace gitsr::rl {

struct TrainingConfig {
  std::size_t episodes = 3000;
  std::uint64_t warmup_steps = 20000;
  std::size_t batch = 32;
  double lr = 1e-4;
  double gamma = 0.9;
  EpsilonSchedule epsilon{};  // decay counted from the end of warm-up
  RewardWeights weights{};
  std::size_t target_update_every = 200;
  double grad_clip = 10.0;
  std::size_t replay_capacity = 1000000;
  std::size_t checkpoint_every = 250;  // episodes; 0 disables
  bool operator==(const TrainingConfig&) const = default;
};

struct EpisodeMetrics {
  std::size_t episode = 0;
  double ret = 0.0;  // undiscounted sum of step rewards
  double success_rate = 0.0;
  std::size_t collisions = 0;
  double mean_speed = 0.0;  // over (step, active CAV) pairs after each step
  double epsilon = 0.0;     // exploration rate of the last decision
  std::size_t steps = 0;
  double wall_ms = 0.0;
};

/// What happened in one tick, for traces.
struct StepRecord {
  std::size_t step = 0;  // index of the tick just taken, 1-based
  std::vector<int> actions;  // per CAV token
  RewardBreakdown reward;
};

using StepObserver = std::function<void(const WorldState& after, const StepRecord&)>;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

enum class SeedStream : std::uint64_t { Init = 1, Actions = 2, Replay = 3, TrainWorld = 4, EvalWorld = 5 };

inline std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ (static_cast<std::uint64_t>(stream) << 56)) + index);
}

/// Fraction of CAVs that left through their own ramp.
inline double success_rate(const WorldState& w) {
  std::size_t ok = 0, n = 0;
  for (const auto& v : w.vehicles) {
    if (!is_cav(v.kind)) continue;
    ++n;
    ok += v.outcome == Outcome::ExitedCorrectRamp;
  }
  return n ? static_cast<double>(ok) / static_cast<double>(n) : 0.0;
}

/// One seed's learner, replay buffer and environment loop.
class Trainer {
 public:
  Trainer(const ScenarioConfig& scenario, ModelVariant variant, Representation rep, const TrainingConfig& cfg,
          std::uint64_t seed)
      : scenario_(scenario),
        cfg_(cfg),
        seed_(seed),
        learner_(network_config(variant, rep, scenario), rep, scenario,
                 LearnerConfig{cfg.lr, cfg.gamma, cfg.batch, cfg.grad_clip, cfg.target_update_every},
                 derive_seed(seed, SeedStream::Init)),
        buffer_(cfg.replay_capacity),
        action_rng_(derive_seed(seed, SeedStream::Actions)),
        replay_rng_(derive_seed(seed, SeedStream::Replay)) {
    detail::require(cfg.batch > 0 && cfg.replay_capacity >= cfg.batch, "TrainingConfig: replay smaller than batch");
  }

  DqnLearner& learner() { return learner_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::uint64_t global_step() const { return global_step_; }
  std::size_t episodes_done() const { return train_episodes_; }
  bool in_warmup() const { return global_step_ < cfg_.warmup_steps; }
  double current_epsilon() const {
    return in_warmup() ? 1.0 : cfg_.epsilon(global_step_ - cfg_.warmup_steps);
  }

  /// Training episode: uniform actions during warm-up, then epsilon-greedy with one gradient
  /// step per environment step.
  EpisodeMetrics train_episode(const StepObserver& obs = {}) {
    const auto seed = derive_seed(seed_, SeedStream::TrainWorld, train_episodes_);
    auto m = run(seed, /*train=*/true, obs);
    m.episode = ++train_episodes_;
    return m;
  }

  /// Greedy episode on the evaluation seed stream; nothing is stored or learned.
  EpisodeMetrics eval_episode(std::size_t index, const StepObserver& obs = {}) {
    auto m = run(eval_world_seed(index), /*train=*/false, obs);
    m.episode = index + 1;
    return m;
  }

  std::uint64_t eval_world_seed(std::size_t index) const { return derive_seed(seed_, SeedStream::EvalWorld, index); }

 private:
  EpisodeMetrics run(std::uint64_t world_seed, bool train, const StepObserver& obs) {
    const auto t0 = std::chrono::steady_clock::now();
    EpisodeMetrics m;
    WorldState w = reset(scenario_, world_seed);
    const auto cavs = cav_ids(w);
    std::vector<ActionCommand> cmds(cavs.size());
    double speed_sum = 0.0;
    std::size_t speed_n = 0;
    while (!episode_done(w, scenario_)) {
      const bool warm = train && in_warmup();
      m.epsilon = warm ? 1.0 : (train ? current_epsilon() : 0.0);
      std::vector<int> actions(cavs.size());
      if (warm) {
        for (auto& a : actions) a = static_cast<int>(action_rng_() % kNumActions);
      } else {
        actions = select_actions(learner_.q_values(learner_.observe(w)), m.epsilon, action_rng_);
      }
      for (std::size_t k = 0; k < cavs.size(); ++k) {
        if (!w.vehicles[cavs[k]].active) actions[k] = kIdleAction.encode();
        cmds[k] = ActionCommand::decode(actions[k]);
      }
      Frame before;
      if (train) before = pack(w);
      const StepEvents ev = step(w, cmds, scenario_);
      const RewardBreakdown r = compute_reward(w, ev, cfg_.weights, scenario_);
      const bool done = episode_done(w, scenario_);

      m.ret += r.total;
      m.collisions += ev.collisions.size();
      ++m.steps;
      for (auto id : cavs)
        if (w.vehicles[id].active) {
          speed_sum += w.vehicles[id].v;
          ++speed_n;
        }
      if (obs) obs(w, StepRecord{w.step_index, actions, r});

      if (train) {
        Transition t;
        t.s = std::move(before);
        t.s_next = pack(w);
        t.actions.assign(actions.begin(), actions.end());
        t.reward = r.total;
        t.done = done;
        buffer_.push(std::move(t));
        ++global_step_;
        if (!in_warmup()) learner_.train_step(buffer_, replay_rng_);
      }
    }
    m.success_rate = success_rate(w);
    m.mean_speed = speed_n ? speed_sum / static_cast<double>(speed_n) : 0.0;
    m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return m;
  }

  ScenarioConfig scenario_;
  TrainingConfig cfg_;
  std::uint64_t seed_;
  DqnLearner learner_;
  ReplayBuffer buffer_;
  std::mt19937_64 action_rng_, replay_rng_;
  std::uint64_t global_step_ = 0;
  std::size_t train_episodes_ = 0;
};

}  // namespace gitsr::rl
