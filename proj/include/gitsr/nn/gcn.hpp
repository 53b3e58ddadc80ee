#pragma once

#include <cmath>
#include <vector>

#include "gitsr/nn/layers.hpp"

namespace gitsr::nn {

struct GcnConfig {
  std::vector<std::size_t> dims{10, 128, 128};  // input width, then one entry per layer

  std::size_t n_layers() const { return dims.size() - 1; }
  bool operator==(const GcnConfig&) const = default;
};

/// D^{-1/2} A~ D^{-1/2} with A~ = min(A + I, 1); D is the degree of A~.
template <class T>
Tensor<T> gcn_normalize(const Tensor<double>& adjacency) {
  const std::size_t n = adjacency.rows();
  detail::require(adjacency.cols() == n, "gcn_normalize: adjacency must be square");
  Tensor<double> a(n, n);
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      detail::require(adjacency(i, j) == adjacency(j, i), "gcn_normalize: adjacency must be symmetric");
      a(i, j) = std::min(adjacency(i, j) + (i == j ? 1.0 : 0.0), 1.0);
      deg[i] += a(i, j);
    }
  Tensor<T> out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = static_cast<T>(a(i, j) / std::sqrt(deg[i] * deg[j]));
  return out;
}

/// Block-diagonal product: rows [g*n, (g+1)*n) of `x` are mixed by the n x n block stored in
/// rows [g*n, (g+1)*n) of `a`. With `transposed`, each block is applied transposed.
template <class T>
Tensor<T> block_mix(const Tensor<T>& a, const Tensor<T>& x, bool transposed = false) {
  const std::size_t n = a.cols();
  detail::require(a.rows() == x.rows() && n > 0 && a.rows() % n == 0, "block_mix: shape mismatch");
  Tensor<T> y(x.rows(), x.cols());
  for (std::size_t g = 0; g < a.rows() / n; ++g) {
    for (std::size_t i = 0; i < n; ++i) {
      T* yr = y.row(g * n + i);
      for (std::size_t j = 0; j < n; ++j) {
        const T w = transposed ? a(g * n + j, i) : a(g * n + i, j);
        if (w == T{}) continue;
        const T* xr = x.row(g * n + j);
        for (std::size_t c = 0; c < x.cols(); ++c) yr[c] += w * xr[c];
      }
    }
  }
  return y;
}

/// H' = ReLU(A_norm H W), applied per graph of the batch.
template <class T>
class GcnLayer {
 public:
  GcnLayer(ParamStore<T>& store, const std::string& name, std::size_t in, std::size_t out, std::mt19937_64& rng)
      : lin_(store, name, in, out, rng, /*bias=*/false) {}

  Tensor<T> forward(const Tensor<T>& h, const Tensor<T>& a_norm) {
    a_ = &a_norm;
    y_ = relu(block_mix(a_norm, lin_.forward(h)));
    return y_;
  }

  Tensor<T> backward(const Tensor<T>& dy, bool need_dx = true) {
    Tensor<T> d = dy;
    relu_backward_inplace(d, y_);
    return lin_.backward(block_mix(*a_, d, /*transposed=*/true), need_dx);
  }

 private:
  Linear<T> lin_;
  const Tensor<T>* a_ = nullptr;
  Tensor<T> y_;
};

template <class T>
class Gcn {
 public:
  Gcn(ParamStore<T>& store, const std::string& name, const GcnConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
    detail::require(cfg.dims.size() >= 2, "GcnConfig: need at least one layer");
    layers_.reserve(cfg.n_layers());
    for (std::size_t l = 0; l < cfg.n_layers(); ++l)
      layers_.emplace_back(store, name + ".layer" + std::to_string(l), cfg.dims[l], cfg.dims[l + 1], rng);
  }

  const GcnConfig& config() const { return cfg_; }

  /// `a_norm` must outlive the matching backward call.
  Tensor<T> forward(const Tensor<T>& features, const Tensor<T>& a_norm) {
    Tensor<T> h = features;
    for (auto& l : layers_) h = l.forward(h, a_norm);
    return h;
  }

  void backward(const Tensor<T>& dy) {
    Tensor<T> d = dy;
    for (std::size_t l = layers_.size(); l-- > 0;) d = layers_[l].backward(d, l > 0);
  }

 private:
  GcnConfig cfg_;
  std::vector<GcnLayer<T>> layers_;
};

}  // namespace gitsr::nn
