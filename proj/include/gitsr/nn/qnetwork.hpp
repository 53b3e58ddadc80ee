#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gitsr/nn/gcn.hpp"
#include "gitsr/nn/transformer.hpp"
#include "gitsr/sim/vehicle.hpp"

namespace gitsr::nn {

enum class ModelVariant { Gitsr, MadqnTransformer, Madqn };

inline std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::Gitsr: return "gitsr";
    case ModelVariant::MadqnTransformer: return "madqn_transformer";
    case ModelVariant::Madqn: return "madqn";
  }
  return "?";
}

inline std::optional<ModelVariant> parse_variant(const std::string& s) {
  for (auto v : {ModelVariant::Gitsr, ModelVariant::MadqnTransformer, ModelVariant::Madqn})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

struct NetworkConfig {
  ModelVariant variant = ModelVariant::Gitsr;
  TransformerConfig transformer{};
  GcnConfig gcn{};
  std::size_t head_hidden = 256;
  std::size_t n_actions = kNumActions;

  std::size_t sr_width() const { return transformer.input_width; }
  std::size_t feature_width() const { return gcn.dims.front(); }

  /// Width of the per-CAV vector fed to the Q-head.
  std::size_t head_input() const {
    switch (variant) {
      case ModelVariant::Gitsr: return transformer.d_model + gcn.dims.back();
      case ModelVariant::MadqnTransformer: return transformer.d_model;
      case ModelVariant::Madqn: return feature_width() + sr_width();
    }
    return 0;
  }

  bool operator==(const NetworkConfig&) const = default;
};

/// A batch of B states with m CAV tokens and n graph nodes each.
template <class T>
struct NetworkInput {
  std::size_t batch = 0;
  std::size_t tokens = 0;  // m
  std::size_t nodes = 0;   // n
  Tensor<T> sr;            // (B*m) x sr_width
  Tensor<T> features;      // (B*n) x feature_width
  Tensor<T> adjacency;     // (B*n) x n, already normalised
  std::vector<std::size_t> cav_rows;  // B*m rows of `features` selected by the mask, in token order
};

/// Selects mask-1 rows of `nodes` (n rows per graph, B graphs) in order; the count per graph
/// must equal `tokens`.
inline std::vector<std::size_t> masked_rows(const std::vector<std::uint8_t>& mask, std::size_t batch,
                                            std::size_t tokens) {
  std::vector<std::size_t> rows;
  const std::size_t n = mask.size();
  for (std::size_t b = 0; b < batch; ++b) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) {
        rows.push_back(b * n + i);
        ++count;
      }
    detail::require(count == tokens, "mask selects " + std::to_string(count) + " rows but there are " +
                                         std::to_string(tokens) + " CAV tokens");
  }
  return rows;
}

/// Row-wise concatenation [a_i | b_{rows[i]}].
template <class T>
Tensor<T> splice_rows(const Tensor<T>& a, const Tensor<T>& b, const std::vector<std::size_t>& rows) {
  detail::require(rows.size() == a.rows(), "splice_rows: row count mismatch");
  Tensor<T> out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::copy(a.row(i), a.row(i) + a.cols(), out.row(i));
    std::copy(b.row(rows[i]), b.row(rows[i]) + b.cols(), out.row(i) + a.cols());
  }
  return out;
}

/// Two-layer MLP mapping each CAV's spliced state to its action values.
template <class T>
class QHead {
 public:
  QHead(ParamStore<T>& store, const std::string& name, std::size_t in, std::size_t hidden, std::size_t actions,
        std::mt19937_64& rng)
      : fc1_(store, name + ".fc1", in, hidden, rng), fc2_(store, name + ".fc2", hidden, actions, rng) {}

  Tensor<T> forward(const Tensor<T>& x) {
    hidden_ = relu(fc1_.forward(x));
    return fc2_.forward(hidden_);
  }

  Tensor<T> backward(const Tensor<T>& dq, bool need_dx) {
    Tensor<T> dh = fc2_.backward(dq);
    relu_backward_inplace(dh, hidden_);
    return fc1_.backward(dh, need_dx);
  }

 private:
  Linear<T> fc1_, fc2_;
  Tensor<T> hidden_;
};

/// Q-network for all three model variants:
///   gitsr             Q = head([Transformer(SR) | mask(GCN(N, E))])
///   madqn_transformer Q = head(Transformer(SR))
///   madqn             Q = head([mask(N) | SR])
/// Output is (B*m) x n_actions, row order matching the CAV tokens.
template <class T>
class QNetwork {
 public:
  QNetwork(const NetworkConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    std::mt19937_64 rng(seed);
    if (cfg.variant != ModelVariant::Madqn)
      encoder_ = std::make_unique<TransformerEncoder<T>>(params_, "encoder", cfg.transformer, rng);
    if (cfg.variant == ModelVariant::Gitsr) {
      detail::require(cfg.gcn.dims.back() == cfg.transformer.d_model, "GcnConfig: last width must equal d_model");
      gcn_ = std::make_unique<Gcn<T>>(params_, "gcn", cfg.gcn, rng);
    }
    head_ = std::make_unique<QHead<T>>(params_, "head", cfg.head_input(), cfg.head_hidden, cfg.n_actions, rng);
  }

  const NetworkConfig& config() const { return cfg_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }

  Tensor<T> forward(const NetworkInput<T>& in) {
    detail::require(in.sr.rows() == in.batch * in.tokens && in.sr.cols() == cfg_.sr_width(),
                    "QNetwork: SR shape " + shape_str(in.sr) + " does not match config");
    detail::require(in.cav_rows.size() == in.batch * in.tokens, "QNetwork: cav_rows size mismatch");
    batch_rows_ = in.features.rows();
    rows_ = in.cav_rows;
    Tensor<T> head_in;
    switch (cfg_.variant) {
      case ModelVariant::Gitsr: {
        detail::require(in.features.cols() == cfg_.feature_width() && in.adjacency.rows() == in.features.rows() &&
                            in.adjacency.cols() == in.nodes,
                        "QNetwork: graph input shape mismatch");
        adjacency_ = in.adjacency;
        head_in = splice_rows(encoder_->forward(in.sr, in.tokens), gcn_->forward(in.features, adjacency_), rows_);
        break;
      }
      case ModelVariant::MadqnTransformer: head_in = encoder_->forward(in.sr, in.tokens); break;
      case ModelVariant::Madqn: {
        detail::require(in.features.cols() == cfg_.feature_width(), "QNetwork: feature width mismatch");
        Tensor<T> selected(rows_.size(), in.features.cols());
        for (std::size_t i = 0; i < rows_.size(); ++i)
          std::copy(in.features.row(rows_[i]), in.features.row(rows_[i]) + in.features.cols(), selected.row(i));
        head_in = splice_rows(selected, in.sr, identity_rows(rows_.size()));
        break;
      }
    }
    return head_->forward(head_in);
  }

  /// Accumulates d(loss)/d(param) for the last forward pass, given d(loss)/dQ.
  void backward(const Tensor<T>& dq) {
    const bool need_dx = cfg_.variant != ModelVariant::Madqn;
    Tensor<T> dh = head_->backward(dq, need_dx);
    if (cfg_.variant == ModelVariant::MadqnTransformer) {
      encoder_->backward(dh);
    } else if (cfg_.variant == ModelVariant::Gitsr) {
      const std::size_t d_enc = cfg_.transformer.d_model, d_gcn = cfg_.gcn.dims.back();
      Tensor<T> d_x(dh.rows(), d_enc), d_nodes(batch_rows_, d_gcn);
      for (std::size_t i = 0; i < dh.rows(); ++i) {
        std::copy(dh.row(i), dh.row(i) + d_enc, d_x.row(i));
        T* dst = d_nodes.row(rows_[i]);
        const T* src = dh.row(i) + d_enc;
        for (std::size_t c = 0; c < d_gcn; ++c) dst[c] += src[c];
      }
      encoder_->backward(d_x);
      gcn_->backward(d_nodes);
    }
  }

  const TransformerEncoder<T>* encoder() const { return encoder_.get(); }

 private:
  static std::vector<std::size_t> identity_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = i;
    return r;
  }

  NetworkConfig cfg_;
  ParamStore<T> params_;
  std::unique_ptr<TransformerEncoder<T>> encoder_;
  std::unique_ptr<Gcn<T>> gcn_;
  std::unique_ptr<QHead<T>> head_;
  Tensor<T> adjacency_;
  std::vector<std::size_t> rows_;
  std::size_t batch_rows_ = 0;
};

}  // namespace gitsr::nn
