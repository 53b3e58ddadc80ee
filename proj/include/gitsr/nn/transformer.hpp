#pragma once

#include <vector>

#include "gitsr/nn/attention.hpp"

namespace gitsr::nn {

struct TransformerConfig {
  std::size_t n_blocks = 2;
  std::size_t n_heads = 4;
  std::size_t d_model = 128;
  std::size_t mlp_hidden = 256;
  std::size_t input_width = 153;

  std::size_t d_head() const { return d_model / n_heads; }
  bool operator==(const TransformerConfig&) const = default;
};

/// One encoder block: X' = MHA(X);  Y = LN(MLP(X' + X)).
template <class T>
class TransformerBlock {
 public:
  TransformerBlock(ParamStore<T>& store, const std::string& name, const TransformerConfig& cfg,
                   std::mt19937_64& rng)
      : mha_(store, name + ".mha", cfg.d_model, cfg.n_heads, rng),
        fc1_(store, name + ".mlp1", cfg.d_model, cfg.mlp_hidden, rng),
        fc2_(store, name + ".mlp2", cfg.mlp_hidden, cfg.d_model, rng),
        ln_(store, name + ".ln", cfg.d_model) {}

  Tensor<T> forward(const Tensor<T>& x, std::size_t seq_len) {
    Tensor<T> z = mha_.forward(x, seq_len);
    add_inplace(z, x);
    hidden_ = relu(fc1_.forward(z));
    return ln_.forward(fc2_.forward(hidden_));
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dh = fc2_.backward(ln_.backward(dy));
    relu_backward_inplace(dh, hidden_);
    Tensor<T> dz = fc1_.backward(dh);
    Tensor<T> dx = mha_.backward(dz);
    add_inplace(dx, dz);
    return dx;
  }

  const MultiHeadAttention<T>& attention() const { return mha_; }
  const LayerNorm<T>& norm() const { return ln_; }

 private:
  MultiHeadAttention<T> mha_;
  Linear<T> fc1_, fc2_;
  LayerNorm<T> ln_;
  Tensor<T> hidden_;
};

/// Linear embedding followed by n_blocks encoder blocks. No positional encoding, so the output
/// is equivariant to permutations of the tokens inside a sequence.
template <class T>
class TransformerEncoder {
 public:
  TransformerEncoder(ParamStore<T>& store, const std::string& name, const TransformerConfig& cfg,
                     std::mt19937_64& rng)
      : cfg_(cfg), embed_(store, name + ".embed", cfg.input_width, cfg.d_model, rng) {
    detail::require(cfg.n_heads * cfg.d_head() == cfg.d_model, "TransformerConfig: n_heads * d_head != d_model");
    blocks_.reserve(cfg.n_blocks);
    for (std::size_t l = 0; l < cfg.n_blocks; ++l)
      blocks_.emplace_back(store, name + ".block" + std::to_string(l), cfg, rng);
  }

  const TransformerConfig& config() const { return cfg_; }

  Tensor<T> forward(const Tensor<T>& sr, std::size_t seq_len) {
    Tensor<T> x = embed_.forward(sr);
    for (auto& b : blocks_) x = b.forward(x, seq_len);
    return x;
  }

  void backward(const Tensor<T>& dy) {
    Tensor<T> d = dy;
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) d = it->backward(d);
    embed_.backward(d, /*need_dx=*/false);
  }

  const std::vector<TransformerBlock<T>>& blocks() const { return blocks_; }

 private:
  TransformerConfig cfg_;
  Linear<T> embed_;
  std::vector<TransformerBlock<T>> blocks_;
};

}  // namespace gitsr::nn
