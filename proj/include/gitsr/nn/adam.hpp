#pragma once

#include <cmath>
#include <cstdint>

#include "gitsr/nn/param.hpp"

namespace gitsr::nn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Clears gradients after every update.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  std::uint64_t steps() const { return t_; }

  template <class T>
  void step(ParamStore<T>& store) {
    ++t_;
    const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
    const T inv_bc1 = static_cast<T>(1.0 / (1.0 - std::pow(cfg_.beta1, static_cast<double>(t_))));
    const T inv_bc2 = static_cast<T>(1.0 / (1.0 - std::pow(cfg_.beta2, static_cast<double>(t_))));
    const T lr = static_cast<T>(cfg_.lr), eps = static_cast<T>(cfg_.eps);
    for (std::size_t i = 0; i < store.size(); ++i) {
      auto& p = store[i];
      T* __restrict w = p.value.data();
      T* __restrict g = p.grad.data();
      T* __restrict m = p.adam_m.data();
      T* __restrict v = p.adam_v.data();
      const std::size_t n = p.value.size();
      for (std::size_t k = 0; k < n; ++k) {
        const T gk = g[k];
        m[k] = b1 * m[k] + (T{1} - b1) * gk;
        v[k] = b2 * v[k] + (T{1} - b2) * gk * gk;
        w[k] -= lr * (m[k] * inv_bc1) / (std::sqrt(v[k] * inv_bc2) + eps);
        g[k] = T{};
      }
    }
  }

 private:
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
};

/// Rescales all gradients so their global L2 norm is at most `max_norm`. Returns the norm
/// before clipping.
template <class T>
double clip_grad_norm(ParamStore<T>& store, double max_norm) {
  const double norm = store.grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (std::size_t i = 0; i < store.size(); ++i)
      for (auto& g : store[i].grad.values()) g = static_cast<T>(g * s);
  }
  return norm;
}

/// Throws TrainingError naming the first parameter with a NaN or infinite gradient.
template <class T>
void check_finite_gradients(const ParamStore<T>& store) {
  for (std::size_t i = 0; i < store.size(); ++i)
    if (!store[i].grad.all_finite()) throw TrainingError("non-finite gradient in parameter '" + store[i].name + "'");
}

}  // namespace gitsr::nn
