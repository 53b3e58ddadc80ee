#pragma once

#include <algorithm>
#include <cstdint>

namespace gitsr::rl {

/// Linear decay from `start` to `end` over `decay_steps`, constant afterwards.
struct EpsilonSchedule {
  double start = 0.99;
  double end = 0.001;
  std::uint64_t decay_steps = 40000;

  double operator()(std::uint64_t step) const {
    if (decay_steps == 0 || step >= decay_steps) return end;
    const double f = static_cast<double>(step) / static_cast<double>(decay_steps);
    return std::max(end, start + (end - start) * f);
  }
  bool operator==(const EpsilonSchedule&) const = default;
};

}  // namespace gitsr::rl
