#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gitsr/error.hpp"
#include "gitsr/nn/qnetwork.hpp"

namespace gitsr::nn {

// Checkpoint = <base>.json manifest (network config, parameter names, shapes, byte offsets)
//            + <base>.bin little-endian float32 blob, parameters concatenated in manifest order.

inline nlohmann::json to_json(const NetworkConfig& c) {
  return {{"variant", to_string(c.variant)},
          {"transformer",
           {{"n_blocks", c.transformer.n_blocks},
            {"n_heads", c.transformer.n_heads},
            {"d_model", c.transformer.d_model},
            {"mlp_hidden", c.transformer.mlp_hidden},
            {"input_width", c.transformer.input_width}}},
          {"gcn_dims", c.gcn.dims},
          {"head_hidden", c.head_hidden},
          {"n_actions", c.n_actions}};
}

inline NetworkConfig network_config_from_json(const nlohmann::json& j) {
  NetworkConfig c;
  try {
    auto v = parse_variant(j.at("variant").get<std::string>());
    if (!v) throw ConfigError("checkpoint: unknown variant " + j.at("variant").dump());
    c.variant = *v;
    const auto& t = j.at("transformer");
    c.transformer.n_blocks = t.at("n_blocks");
    c.transformer.n_heads = t.at("n_heads");
    c.transformer.d_model = t.at("d_model");
    c.transformer.mlp_hidden = t.at("mlp_hidden");
    c.transformer.input_width = t.at("input_width");
    c.gcn.dims = j.at("gcn_dims").get<std::vector<std::size_t>>();
    c.head_hidden = j.at("head_hidden");
    c.n_actions = j.at("n_actions");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: malformed network config: ") + e.what());
  }
  return c;
}

struct Checkpoint {
  NetworkConfig network;
  nlohmann::json meta;
  std::vector<std::string> names;
  std::vector<Tensor<float>> values;
};

namespace detail_ckpt {

inline std::uint32_t to_le(std::uint32_t u) {
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
  return u;
}

inline std::filesystem::path blob_path(const std::filesystem::path& manifest) {
  auto p = manifest;
  return p.replace_extension(".bin");
}

}  // namespace detail_ckpt

/// Writes `<base>.json` and `<base>.bin`; returns the manifest path.
template <class T>
std::filesystem::path save_checkpoint(const QNetwork<T>& net, const std::filesystem::path& base,
                                      const nlohmann::json& meta = nlohmann::json::object()) {
  std::filesystem::path manifest = base;
  manifest += ".json";
  const auto blob = detail_ckpt::blob_path(manifest);
  nlohmann::json params = nlohmann::json::array();
  std::ofstream bin(blob, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + blob.string());
  std::size_t offset = 0;
  const auto& store = net.params();
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& p = store[i];
    const std::size_t bytes = p.value.size() * sizeof(float);
    params.push_back({{"name", p.name}, {"shape", {p.value.rows(), p.value.cols()}}, {"offset", offset}, {"bytes", bytes}});
    for (T v : p.value.values()) {
      const float f = static_cast<float>(v);
      const std::uint32_t u = detail_ckpt::to_le(std::bit_cast<std::uint32_t>(f));
      bin.write(reinterpret_cast<const char*>(&u), sizeof(u));
    }
    offset += bytes;
  }
  bin.close();
  nlohmann::json j{{"format", "gitsr-checkpoint"},
                   {"version", 1},
                   {"dtype", "float32"},
                   {"endianness", "little"},
                   {"blob", blob.filename().string()},
                   {"blob_bytes", offset},
                   {"network", to_json(net.config())},
                   {"params", params},
                   {"meta", meta}};
  std::ofstream(manifest) << j.dump(2) << '\n';
  return manifest;
}

inline Checkpoint load_checkpoint(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw ConfigError("checkpoint: cannot open " + manifest.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("checkpoint: " + manifest.string() + " is not valid JSON: " + e.what());
  }
  if (j.value("format", "") != "gitsr-checkpoint" || j.value("dtype", "") != "float32")
    throw ConfigError("checkpoint: " + manifest.string() + " is not a float32 gitsr checkpoint");
  Checkpoint ck;
  ck.network = network_config_from_json(j.at("network"));
  ck.meta = j.value("meta", nlohmann::json::object());
  const auto blob = manifest.parent_path() / j.at("blob").get<std::string>();
  std::ifstream bin(blob, std::ios::binary);
  if (!bin) throw ConfigError("checkpoint: cannot open blob " + blob.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  if (bytes.size() != j.at("blob_bytes").get<std::size_t>())
    throw ConfigError("checkpoint: blob size " + std::to_string(bytes.size()) + " != manifest " +
                      j.at("blob_bytes").dump());
  for (const auto& p : j.at("params")) {
    const auto rows = p.at("shape").at(0).get<std::size_t>(), cols = p.at("shape").at(1).get<std::size_t>();
    const auto offset = p.at("offset").get<std::size_t>();
    if (offset + rows * cols * sizeof(float) > bytes.size())
      throw ConfigError("checkpoint: parameter " + p.at("name").get<std::string>() + " overruns the blob");
    Tensor<float> t(rows, cols);
    for (std::size_t k = 0; k < t.size(); ++k) {
      std::uint32_t u;
      std::memcpy(&u, bytes.data() + offset + k * sizeof(u), sizeof(u));
      t.data()[k] = std::bit_cast<float>(detail_ckpt::to_le(u));
    }
    ck.names.push_back(p.at("name"));
    ck.values.push_back(std::move(t));
  }
  return ck;
}

/// Copies checkpoint values into `net`, failing with a descriptive error on any layout mismatch.
template <class T>
void apply_checkpoint(QNetwork<T>& net, const Checkpoint& ck) {
  auto& store = net.params();
  if (ck.network.variant != net.config().variant)
    throw ConfigError("checkpoint variant '" + to_string(ck.network.variant) + "' does not match network variant '" +
                      to_string(net.config().variant) + "'");
  if (ck.names.size() != store.size())
    throw ConfigError("checkpoint has " + std::to_string(ck.names.size()) + " parameters, network expects " +
                      std::to_string(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto& p = store[i];
    const auto& v = ck.values[i];
    if (ck.names[i] != p.name) throw ConfigError("checkpoint parameter #" + std::to_string(i) + " is '" + ck.names[i] + "', network expects '" + p.name + "'");
    if (v.rows() != p.value.rows() || v.cols() != p.value.cols())
      throw ConfigError("checkpoint parameter '" + p.name + "' has shape " + shape_str(v) + ", network expects " +
                        shape_str(p.value));
    if constexpr (std::is_same_v<T, float>) {
      p.value = v;
    } else {
      p.value = v.template cast<T>();
    }
  }
}

}  // namespace gitsr::nn
