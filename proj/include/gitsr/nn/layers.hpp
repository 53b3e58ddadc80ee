#pragma once

#include <cmath>
#include <random>
#include <string>

#include "gitsr/nn/ops.hpp"
#include "gitsr/nn/param.hpp"

namespace gitsr::nn {

/// y = x W + b. Row i of x is one token or node.
template <class T>
class Linear {
 public:
  Linear() = default;
  Linear(ParamStore<T>& store, const std::string& name, std::size_t in, std::size_t out, std::mt19937_64& rng,
         bool bias = true)
      : w_(&store.add(name + ".W", in, out)), b_(bias ? &store.add(name + ".b", 1, out) : nullptr) {
    init_glorot_uniform(w_->value, in, out, rng);
  }

  std::size_t in_features() const { return w_->value.rows(); }
  std::size_t out_features() const { return w_->value.cols(); }

  Tensor<T> forward(const Tensor<T>& x) {
    detail::require(x.cols() == in_features(), "Linear " + w_->name + ": input width " + std::to_string(x.cols()) +
                                                    " != " + std::to_string(in_features()));
    x_ = x;
    Tensor<T> y = matmul(x, w_->value);
    if (b_) {
      const T* b = b_->value.data();
      for (std::size_t r = 0; r < y.rows(); ++r) {
        T* yr = y.row(r);
        for (std::size_t c = 0; c < y.cols(); ++c) yr[c] += b[c];
      }
    }
    return y;
  }

  /// Accumulates dW, db and returns dx (empty when `need_dx` is false).
  Tensor<T> backward(const Tensor<T>& dy, bool need_dx = true) {
    matmul_tn_acc(x_, dy, w_->grad);
    if (b_) {
      T* db = b_->grad.data();
      for (std::size_t r = 0; r < dy.rows(); ++r) {
        const T* d = dy.row(r);
        for (std::size_t c = 0; c < dy.cols(); ++c) db[c] += d[c];
      }
    }
    if (!need_dx) return {};
    return matmul_nt(dy, w_->value);
  }

 private:
  Param<T>* w_ = nullptr;
  Param<T>* b_ = nullptr;
  Tensor<T> x_;
};

/// Row-wise layer normalisation with learnable scale and shift.
template <class T>
class LayerNorm {
 public:
  static constexpr double kEps = 1e-5;

  LayerNorm() = default;
  LayerNorm(ParamStore<T>& store, const std::string& name, std::size_t dim)
      : gamma_(&store.add(name + ".gamma", 1, dim)), beta_(&store.add(name + ".beta", 1, dim)) {
    gamma_->value.fill(T{1});
  }

  Tensor<T> forward(const Tensor<T>& x) {
    const std::size_t d = x.cols();
    detail::require(d == gamma_->value.cols(), "LayerNorm: width mismatch");
    xhat_ = Tensor<T>(x.rows(), d);
    inv_std_.assign(x.rows(), T{});
    Tensor<T> y(x.rows(), d);
    const T* g = gamma_->value.data();
    const T* b = beta_->value.data();
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const T* xr = x.row(r);
      double mean = 0.0;
      for (std::size_t c = 0; c < d; ++c) mean += xr[c];
      mean /= static_cast<double>(d);
      double var = 0.0;
      for (std::size_t c = 0; c < d; ++c) var += (xr[c] - mean) * (xr[c] - mean);
      var /= static_cast<double>(d);
      const double inv = 1.0 / std::sqrt(var + kEps);
      inv_std_[r] = static_cast<T>(inv);
      T* h = xhat_.row(r);
      T* yr = y.row(r);
      for (std::size_t c = 0; c < d; ++c) {
        h[c] = static_cast<T>((xr[c] - mean) * inv);
        yr[c] = h[c] * g[c] + b[c];
      }
    }
    return y;
  }

  /// Normalised activations (before scale/shift) of the last forward pass.
  const Tensor<T>& normalized() const { return xhat_; }

  Tensor<T> backward(const Tensor<T>& dy) {
    const std::size_t d = dy.cols();
    Tensor<T> dx(dy.rows(), d);
    const T* g = gamma_->value.data();
    T* dg = gamma_->grad.data();
    T* db = beta_->grad.data();
    for (std::size_t r = 0; r < dy.rows(); ++r) {
      const T* dyr = dy.row(r);
      const T* h = xhat_.row(r);
      double mean_dh = 0.0, mean_dh_h = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        dg[c] += dyr[c] * h[c];
        db[c] += dyr[c];
        const double dh = static_cast<double>(dyr[c]) * g[c];
        mean_dh += dh;
        mean_dh_h += dh * h[c];
      }
      mean_dh /= static_cast<double>(d);
      mean_dh_h /= static_cast<double>(d);
      T* dxr = dx.row(r);
      for (std::size_t c = 0; c < d; ++c) {
        const double dh = static_cast<double>(dyr[c]) * g[c];
        dxr[c] = static_cast<T>(inv_std_[r] * (dh - mean_dh - h[c] * mean_dh_h));
      }
    }
    return dx;
  }

 private:
  Param<T>* gamma_ = nullptr;
  Param<T>* beta_ = nullptr;
  Tensor<T> xhat_;
  std::vector<T> inv_std_;
};

}  // namespace gitsr::nn
