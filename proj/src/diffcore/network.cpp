#include "cpw/diffcore/network.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <utility>

#include <json.hpp>

#include "cpw/error.hpp"
#include "cpw/random.hpp"

namespace cpw::diffcore {

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "cpw-network";

const char* kind_name(LayerKind kind) { return kind == LayerKind::dense ? "dense" : "lstm"; }

LayerKind kind_from_name(const std::string& name) {
  if (name == "dense") return LayerKind::dense;
  if (name == "lstm") return LayerKind::lstm;
  throw DataError("unknown layer kind '" + name + "'");
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

}  // namespace

Architecture mlp_architecture(std::size_t in, const std::vector<std::size_t>& hidden,
                              std::size_t out, Activation hidden_act) {
  Architecture arch;
  std::size_t prev = in;
  for (std::size_t h : hidden) {
    arch.layers.push_back({LayerKind::dense, prev, h, hidden_act});
    prev = h;
  }
  arch.layers.push_back({LayerKind::dense, prev, out, Activation::identity});
  return arch;
}

std::size_t block_count(LayerKind kind) noexcept { return kind == LayerKind::dense ? 2 : 3; }

std::vector<std::vector<std::size_t>> block_shapes(const LayerSpec& layer) {
  if (layer.kind == LayerKind::dense) return {{layer.out, layer.in}, {layer.out}};
  return {{4 * layer.out, layer.in}, {4 * layer.out, layer.out}, {4 * layer.out}};
}

NetworkParams::NetworkParams(Architecture arch) : arch_(std::move(arch)) {
  for (const auto& layer : arch_.layers) {
    for (auto& shape : block_shapes(layer)) blocks_.emplace_back(std::move(shape));
  }
  index_blocks();
}

NetworkParams::NetworkParams(Architecture arch, std::vector<Tensor> blocks)
    : arch_(std::move(arch)), blocks_(std::move(blocks)) {
  std::size_t b = 0;
  for (std::size_t l = 0; l < arch_.layers.size(); ++l) {
    for (const auto& shape : block_shapes(arch_.layers[l])) {
      if (b >= blocks_.size() || blocks_[b].shape() != shape) {
        throw DimensionError("parameter block shape inconsistent with architecture", l);
      }
      ++b;
    }
  }
  if (b != blocks_.size()) throw DimensionError("extra parameter blocks");
  index_blocks();
}

void NetworkParams::index_blocks() {
  first_block_.clear();
  std::size_t b = 0;
  for (const auto& layer : arch_.layers) {
    first_block_.push_back(b);
    b += block_count(layer.kind);
  }
}

std::size_t NetworkParams::num_values() const noexcept {
  std::size_t n = 0;
  for (const auto& t : blocks_) n += t.size();
  return n;
}

bool NetworkParams::all_finite() const noexcept {
  for (const auto& t : blocks_) {
    if (!t.all_finite()) return false;
  }
  return true;
}

void NetworkParams::add_scaled(const NetworkParams& other, double scale) {
  if (other.blocks_.size() != blocks_.size()) throw DimensionError("architecture mismatch");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (other.blocks_[b].size() != blocks_[b].size()) throw DimensionError("architecture mismatch");
    axpy(scale, other.blocks_[b].data(), blocks_[b].data(), blocks_[b].size());
  }
}

void NetworkParams::scale(double s) noexcept {
  for (auto& t : blocks_) {
    for (double& v : t.values()) v *= s;
  }
}

void NetworkParams::set_zero() noexcept {
  for (auto& t : blocks_) {
    for (double& v : t.values()) v = 0.0;
  }
}

std::vector<double> NetworkParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(num_values());
  for (const auto& t : blocks_) flat.insert(flat.end(), t.values().begin(), t.values().end());
  return flat;
}

void NetworkParams::assign_flat(std::span<const double> flat) {
  if (flat.size() != num_values()) throw DimensionError("flat parameter vector has wrong length");
  std::size_t i = 0;
  for (auto& t : blocks_) {
    for (double& v : t.values()) v = flat[i++];
  }
}

NetworkParams init_params(const Architecture& arch, std::uint64_t seed) {
  NetworkParams params(arch);
  Rng rng(seed);
  auto fill_uniform = [&rng](Tensor& t, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : t.values()) v = dist(rng);
  };
  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    const auto& layer = arch.layers[l];
    if (layer.kind == LayerKind::dense) {
      fill_uniform(params.block(l, 0), layer.in, layer.out);
    } else {
      fill_uniform(params.block(l, 0), layer.in, layer.out);
      fill_uniform(params.block(l, 1), layer.out, layer.out);
      Tensor& bias = params.block(l, 2);
      for (std::size_t h = 0; h < layer.out; ++h) bias[layer.out + h] = 1.0;
    }
  }
  return params;
}

std::vector<std::uint8_t> serialize(const NetworkParams& params) {
  nlohmann::json header;
  header["format"] = kFormatName;
  header["version"] = kFormatVersion;
  header["architecture"]["family"] = params.architecture().family;
  auto& layers = header["architecture"]["layers"];
  layers = nlohmann::json::array();
  for (const auto& layer : params.architecture().layers) {
    layers.push_back({{"kind", kind_name(layer.kind)},
                      {"in", layer.in},
                      {"out", layer.out},
                      {"activation", std::string(to_string(layer.act))}});
  }
  auto& shapes = header["block_shapes"];
  shapes = nlohmann::json::array();
  for (const auto& t : params.blocks()) shapes.push_back(t.shape());

  const std::string text = header.dump();
  std::vector<std::uint8_t> out;
  out.reserve(8 + text.size() + 8 * params.num_values());
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& t : params.blocks()) {
    for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

NetworkParams deserialize_prefix(std::span<const std::uint8_t> bytes, std::size_t& consumed) {
  if (bytes.size() < 8) throw DataError("truncated network blob");
  const std::uint64_t header_len = get_u64(bytes.data());
  if (bytes.size() - 8 < header_len) throw DataError("truncated network header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad network header: ") + e.what());
  }
  if (header.value("format", "") != kFormatName || header.value("version", 0) != kFormatVersion) {
    throw DataError("unsupported network format");
  }
  Architecture arch;
  arch.family = header["architecture"]["family"].get<std::string>();
  for (const auto& l : header["architecture"]["layers"]) {
    arch.layers.push_back({kind_from_name(l["kind"].get<std::string>()), l["in"].get<std::size_t>(),
                           l["out"].get<std::size_t>(),
                           activation_from_string(l["activation"].get<std::string>())});
  }
  std::size_t pos = 8 + header_len;
  std::vector<Tensor> blocks;
  for (const auto& s : header["block_shapes"]) {
    auto shape = s.get<std::vector<std::size_t>>();
    const std::size_t n = shape_volume(shape);
    if ((bytes.size() - pos) / 8 < n) throw DataError("truncated network values");
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i, pos += 8) values[i] = std::bit_cast<double>(get_u64(bytes.data() + pos));
    blocks.emplace_back(std::move(shape), std::move(values));
  }
  consumed = pos;
  try {
    return NetworkParams(std::move(arch), std::move(blocks));
  } catch (const DimensionError& e) {
    throw DataError(std::string("inconsistent network blob: ") + e.what());
  }
}

NetworkParams deserialize(std::span<const std::uint8_t> bytes) {
  std::size_t consumed = 0;
  NetworkParams params = deserialize_prefix(bytes, consumed);
  if (consumed != bytes.size()) throw DataError("trailing bytes after network blob");
  return params;
}

}  // namespace cpw::diffcore
