#pragma once

#include <iostream>
#include <optional>
#include <random>
#include <vector>

#include "gitsr/nn/adam.hpp"
#include "gitsr/nn/qnetwork.hpp"
#include "gitsr/rl/replay.hpp"
#include "gitsr/rl/state.hpp"

namespace gitsr::rl {

/// Index of the largest entry of row `r`; ties go to the lowest index.
template <class T>
int argmax_row(const Tensor<T>& q, std::size_t r) {
  int best = 0;
  for (std::size_t a = 1; a < q.cols(); ++a)
    if (q(r, a) > q(r, static_cast<std::size_t>(best))) best = static_cast<int>(a);
  return best;
}

/// Per-CAV epsilon-greedy: each row independently explores with probability `eps`.
template <class T>
std::vector<int> select_actions(const Tensor<T>& q, double eps, std::mt19937_64& rng) {
  std::vector<int> out(q.rows());
  for (std::size_t r = 0; r < q.rows(); ++r) {
    if (eps > 0.0 && nn::uniform01(rng) < eps)
      out[r] = static_cast<int>(rng() % q.cols());
    else
      out[r] = argmax_row(q, r);
  }
  return out;
}

/// y = r + gamma * max_a Q_target(s')[cav] for CAVs still active at s'; y = r when the
/// transition is terminal or the CAV has left. `q_next` holds m rows per transition.
template <class T>
std::vector<double> td_targets(const Tensor<T>& q_next, const std::vector<double>& rewards,
                               const std::vector<bool>& done, const std::vector<std::uint8_t>& active_next,
                               std::size_t tokens, double gamma) {
  detail::require(q_next.rows() == rewards.size() * tokens && active_next.size() == q_next.rows() &&
                      done.size() == rewards.size(),
                  "td_targets: inconsistent batch shapes");
  std::vector<double> y(q_next.rows());
  for (std::size_t i = 0; i < q_next.rows(); ++i) {
    const std::size_t b = i / tokens;
    y[i] = rewards[b];
    if (!done[b] && active_next[i]) y[i] += gamma * static_cast<double>(q_next(i, argmax_row(q_next, i)));
  }
  return y;
}

struct LearnerConfig {
  double lr = 1e-4;
  double gamma = 0.9;
  std::size_t batch = 32;
  double grad_clip = 10.0;
  std::size_t target_update_every = 200;  // gradient steps
};

struct TrainStats {
  double loss = 0.0;
  double grad_norm = 0.0;     // before clipping
  double clipped_norm = 0.0;  // what the optimiser saw
  std::size_t samples = 0;  // (transition, active CAV) pairs in the loss
};

/// Online/target Q-network pair with Adam and the DQN update.
class DqnLearner {
 public:
  DqnLearner(const nn::NetworkConfig& net, Representation rep, const ScenarioConfig& scenario,
             const LearnerConfig& cfg, std::uint64_t init_seed)
      : cfg_(cfg), rep_(rep), scenario_(scenario), online_(net, init_seed), target_(net, init_seed),
        adam_(nn::AdamConfig{cfg.lr}) {}

  nn::QNetwork<float>& online() { return online_; }
  const nn::QNetwork<float>& online() const { return online_; }
  nn::QNetwork<float>& target() { return target_; }
  const LearnerConfig& config() const { return cfg_; }
  std::uint64_t gradient_steps() const { return grad_steps_; }

  StateSnapshot observe(const WorldState& w) const { return build_state(w, online_.config().variant, rep_, scenario_); }

  Tensor<float> q_values(const StateSnapshot& s) { return online_.forward(make_network_input<float>({&s})); }

  void update_target() { target_.params().copy_values_from(online_.params()); }

  /// One gradient step on a uniformly drawn batch; nullopt (and a warning) if the buffer
  /// holds fewer than `batch` transitions.
  std::optional<TrainStats> train_step(const ReplayBuffer& buffer, std::mt19937_64& rng) {
    if (buffer.size() < cfg_.batch || buffer.size() == 0) {
      std::cerr << "warning: train_step skipped, replay holds " << buffer.size() << " < " << cfg_.batch
                << " transitions\n";
      return std::nullopt;
    }
    const auto idx = buffer.sample_indices(cfg_.batch, rng);
    std::vector<const Transition*> batch;
    for (auto i : idx) batch.push_back(&buffer.raw(i));
    return train_on(batch);
  }

  /// The DQN update on an explicit batch of transitions.
  TrainStats train_on(const std::vector<const Transition*>& batch) {
    const auto variant = online_.config().variant;
    std::vector<StateSnapshot> s, s2;
    s.reserve(batch.size());
    s2.reserve(batch.size());
    std::vector<double> rewards;
    std::vector<bool> done;
    for (const auto* t : batch) {
      s.push_back(build_state(unpack(t->s), variant, rep_, scenario_));
      s2.push_back(build_state(unpack(t->s_next), variant, rep_, scenario_));
      rewards.push_back(t->reward);
      done.push_back(t->done);
    }
    std::vector<const StateSnapshot*> ps, ps2;
    std::vector<std::uint8_t> active, active_next;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      ps.push_back(&s[b]);
      ps2.push_back(&s2[b]);
      active.insert(active.end(), s[b].cav_active.begin(), s[b].cav_active.end());
      active_next.insert(active_next.end(), s2[b].cav_active.begin(), s2[b].cav_active.end());
    }
    const std::size_t tokens = s.front().sr.rows();
    const auto y = td_targets(target_.forward(make_network_input<float>(ps2)), rewards, done, active_next, tokens,
                              cfg_.gamma);

    const auto q = online_.forward(make_network_input<float>(ps));
    TrainStats st;
    for (auto a : active) st.samples += a;
    Tensor<float> dq(q.rows(), q.cols());
    if (st.samples > 0) {
      const double k = static_cast<double>(st.samples);
      for (std::size_t i = 0; i < q.rows(); ++i) {
        if (!active[i]) continue;
        const std::size_t a = batch[i / tokens]->actions[i % tokens];
        const double err = static_cast<double>(q(i, a)) - y[i];
        st.loss += err * err / k;
        dq(i, a) = static_cast<float>(2.0 * err / k);
      }
    }
    online_.backward(dq);
    nn::check_finite_gradients(online_.params());
    st.grad_norm = nn::clip_grad_norm(online_.params(), cfg_.grad_clip);
    st.clipped_norm = online_.params().grad_norm();
    adam_.step(online_.params());
    if (++grad_steps_ % cfg_.target_update_every == 0) update_target();
    return st;
  }

 private:
  LearnerConfig cfg_;
  Representation rep_;
  ScenarioConfig scenario_;
  nn::QNetwork<float> online_, target_;
  nn::Adam adam_;
  std::uint64_t grad_steps_ = 0;
};

}  // namespace gitsr::rl
