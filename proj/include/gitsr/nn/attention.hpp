#pragma once

#include <cmath>
#include <vector>

#include "gitsr/nn/layers.hpp"

namespace gitsr::nn {

/// Multi-head scaled dot-product self-attention without biases:
///   head_i = softmax(X Wq_i (X Wk_i)^T / sqrt(d_head)) X Wv_i,  out = concat(head_1..head_h) Wo.
/// Rows of X are grouped into independent sequences of `seq_len` tokens (one per batch sample);
/// attention never crosses a group boundary.
template <class T>
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore<T>& store, const std::string& name, std::size_t d_model, std::size_t heads,
                     std::mt19937_64& rng)
      : d_model_(d_model), heads_(heads) {
    detail::require(heads > 0 && d_model % heads == 0, "MultiHeadAttention: d_model must be divisible by heads");
    wq_ = Linear<T>(store, name + ".q", d_model, d_model, rng, false);
    wk_ = Linear<T>(store, name + ".k", d_model, d_model, rng, false);
    wv_ = Linear<T>(store, name + ".v", d_model, d_model, rng, false);
    wo_ = Linear<T>(store, name + ".o", d_model, d_model, rng, false);
  }

  std::size_t heads() const { return heads_; }
  std::size_t head_dim() const { return d_model_ / heads_; }

  Tensor<T> forward(const Tensor<T>& x, std::size_t seq_len) {
    detail::require(seq_len > 0 && x.rows() % seq_len == 0, "MultiHeadAttention: rows not a multiple of seq_len");
    seq_ = seq_len;
    q_ = wq_.forward(x);
    k_ = wk_.forward(x);
    v_ = wv_.forward(x);
    const std::size_t groups = x.rows() / seq_, dh = head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    probs_.assign(groups * heads_ * seq_ * seq_, T{});
    Tensor<T> concat(x.rows(), d_model_);
    std::vector<double> scores(seq_);
    for (std::size_t g = 0; g < groups; ++g) {
      for (std::size_t h = 0; h < heads_; ++h) {
        const std::size_t off = h * dh;
        for (std::size_t i = 0; i < seq_; ++i) {
          const T* qi = q_.row(g * seq_ + i) + off;
          double mx = -INFINITY;
          for (std::size_t j = 0; j < seq_; ++j) {
            const T* kj = k_.row(g * seq_ + j) + off;
            double s = 0.0;
            for (std::size_t c = 0; c < dh; ++c) s += static_cast<double>(qi[c]) * kj[c];
            scores[j] = s * scale;
            mx = std::max(mx, scores[j]);
          }
          double z = 0.0;
          for (std::size_t j = 0; j < seq_; ++j) z += (scores[j] = std::exp(scores[j] - mx));
          T* p = prob_row(g, h, i);
          T* out = concat.row(g * seq_ + i) + off;
          for (std::size_t j = 0; j < seq_; ++j) {
            p[j] = static_cast<T>(scores[j] / z);
            const T* vj = v_.row(g * seq_ + j) + off;
            for (std::size_t c = 0; c < dh; ++c) out[c] += p[j] * vj[c];
          }
        }
      }
    }
    return wo_.forward(concat);
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const Tensor<T> dconcat = wo_.backward(dy);
    const std::size_t groups = dy.rows() / seq_, dh = head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Tensor<T> dq(dy.rows(), d_model_), dk(dy.rows(), d_model_), dv(dy.rows(), d_model_);
    std::vector<double> dp(seq_);
    for (std::size_t g = 0; g < groups; ++g) {
      for (std::size_t h = 0; h < heads_; ++h) {
        const std::size_t off = h * dh;
        for (std::size_t i = 0; i < seq_; ++i) {
          const T* p = prob_row(g, h, i);
          const T* dout = dconcat.row(g * seq_ + i) + off;
          double dot = 0.0;
          for (std::size_t j = 0; j < seq_; ++j) {
            const T* vj = v_.row(g * seq_ + j) + off;
            T* dvj = dv.row(g * seq_ + j) + off;
            double s = 0.0;
            for (std::size_t c = 0; c < dh; ++c) {
              s += static_cast<double>(dout[c]) * vj[c];
              dvj[c] += p[j] * dout[c];
            }
            dp[j] = s;
            dot += s * p[j];
          }
          T* dqi = dq.row(g * seq_ + i) + off;
          const T* qi = q_.row(g * seq_ + i) + off;
          for (std::size_t j = 0; j < seq_; ++j) {
            const T ds = static_cast<T>(p[j] * (dp[j] - dot) * scale);
            const T* kj = k_.row(g * seq_ + j) + off;
            T* dkj = dk.row(g * seq_ + j) + off;
            for (std::size_t c = 0; c < dh; ++c) {
              dqi[c] += ds * kj[c];
              dkj[c] += ds * qi[c];
            }
          }
        }
      }
    }
    Tensor<T> dx = wq_.backward(dq);
    add_inplace(dx, wk_.backward(dk));
    add_inplace(dx, wv_.backward(dv));
    return dx;
  }

  /// Softmax weights of the last forward pass, laid out [group][head][query][key].
  const std::vector<T>& attention_weights() const { return probs_; }
  std::size_t seq_len() const { return seq_; }

 private:
  T* prob_row(std::size_t g, std::size_t h, std::size_t i) { return probs_.data() + ((g * heads_ + h) * seq_ + i) * seq_; }

  std::size_t d_model_ = 0;
  std::size_t heads_ = 0;
  std::size_t seq_ = 1;
  Linear<T> wq_, wk_, wv_, wo_;
  Tensor<T> q_, k_, v_;
  std::vector<T> probs_;
};

}  // namespace gitsr::nn
