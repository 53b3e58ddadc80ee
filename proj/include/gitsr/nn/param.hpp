#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <type_traits>
#include <vector>

#include "gitsr/tensor.hpp"

namespace gitsr::nn {

/// A learnable tensor with its gradient and Adam moment slots, all of the same shape.
template <class T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> adam_m;
  Tensor<T> adam_v;

  Param(std::string n, std::size_t rows, std::size_t cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols), adam_m(rows, cols), adam_v(rows, cols) {}
};

/// Owns every parameter of one network. Addresses are stable for the store's lifetime, so
/// layers keep raw pointers into it.
template <class T>
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  Param<T>& add(const std::string& name, std::size_t rows, std::size_t cols) {
    detail::require(find(name) == nullptr, "ParamStore: duplicate parameter " + name);
    params_.push_back(std::make_unique<Param<T>>(name, rows, cols));
    return *params_.back();
  }

  Param<T>* find(const std::string& name) {
    for (auto& p : params_)
      if (p->name == name) return p.get();
    return nullptr;
  }
  const Param<T>* find(const std::string& name) const {
    for (const auto& p : params_)
      if (p->name == name) return p.get();
    return nullptr;
  }

  std::size_t size() const { return params_.size(); }
  Param<T>& operator[](std::size_t i) { return *params_[i]; }
  const Param<T>& operator[](std::size_t i) const { return *params_[i]; }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p->grad.fill(T{});
  }

  /// Value copy from a store with identical layout (names and shapes); moments and grads untouched.
  template <class U>
  void copy_values_from(const ParamStore<U>& other) {
    detail::require(other.size() == size(), "ParamStore: parameter count mismatch");
    for (std::size_t i = 0; i < size(); ++i) {
      auto& dst = *params_[i];
      const auto& src = other[i];
      detail::require(dst.name == src.name && dst.value.rows() == src.value.rows() &&
                          dst.value.cols() == src.value.cols(),
                      "ParamStore: layout mismatch at " + dst.name);
      if constexpr (std::is_same_v<T, U>) {
        dst.value = src.value;
      } else {
        dst.value = src.value.template cast<T>();
      }
    }
  }

  double grad_norm() const {
    // independent partial sums so the loop vectorises without reassociation flags
    double acc[8] = {};
    for (const auto& p : params_) {
      const T* g = p->grad.data();
      const std::size_t n = p->grad.size();
      std::size_t k = 0;
      for (; k + 8 <= n; k += 8)
        for (std::size_t u = 0; u < 8; ++u) acc[u] += static_cast<double>(g[k + u]) * static_cast<double>(g[k + u]);
      for (; k < n; ++k) acc[0] += static_cast<double>(g[k]) * static_cast<double>(g[k]);
    }
    double s = 0.0;
    for (double a : acc) s += a;
    return std::sqrt(s);
  }

 private:
  std::vector<std::unique_ptr<Param<T>>> params_;
};

}  // namespace gitsr::nn
