#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "gitsr/error.hpp"
#include "gitsr/rl/state.hpp"

namespace gitsr::rl {

struct Transition {
  Frame s;
  Frame s_next;
  std::vector<std::uint8_t> actions;  // one per CAV token, idle for CAVs inactive at s
  double reward = 0.0;
  bool done = false;
};

/// Fixed-capacity ring buffer; the oldest transition is overwritten once full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    detail::require(capacity > 0, "ReplayBuffer: capacity must be > 0");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return data_.size(); }
  std::uint64_t total_pushed() const { return pushed_; }

  void push(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
    ++pushed_;
  }

  /// i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const { return data_.at((head_ + i) % data_.size()); }

  /// `batch` distinct positions drawn uniformly (Floyd's algorithm).
  std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64& rng) const {
    detail::require(batch <= data_.size(), "ReplayBuffer: batch larger than buffer");
    std::vector<std::size_t> out;
    out.reserve(batch);
    const std::size_t n = data_.size();
    for (std::size_t j = n - batch; j < n; ++j) {
      const std::size_t t = static_cast<std::size_t>(rng() % (j + 1));
      if (std::find(out.begin(), out.end(), t) == out.end())
        out.push_back(t);
      else
        out.push_back(j);
    }
    return out;
  }

  const Transition& raw(std::size_t slot) const { return data_[slot]; }

 private:
  std::size_t capacity_;
  std::vector<Transition> data_;
  std::size_t head_ = 0;  // oldest slot once full
  std::uint64_t pushed_ = 0;
};

}  // namespace gitsr::rl
