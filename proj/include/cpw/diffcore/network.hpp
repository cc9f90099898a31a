#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpw/diffcore/ops.hpp"
#include "cpw/diffcore/tensor.hpp"

namespace cpw::diffcore {

enum class LayerKind { dense, lstm };

/// One layer of an architecture. For LSTM layers `out` is the hidden size
/// and `act` is ignored.
struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t in = 0;
  std::size_t out = 0;
  Activation act = Activation::identity;

  bool operator==(const LayerSpec&) const = default;
};

/// Ordered layer list. `family` tells model code how to wire the layers
/// ("mlp" is a plain feed-forward stack).
struct Architecture {
  std::string family = "mlp";
  std::vector<LayerSpec> layers;

  bool operator==(const Architecture&) const = default;
};

/// Feed-forward stack in -> hidden... -> out. Hidden layers use `hidden_act`,
/// the output layer is linear.
Architecture mlp_architecture(std::size_t in, const std::vector<std::size_t>& hidden,
                              std::size_t out, Activation hidden_act);

/// Number of parameter blocks a layer owns: dense = {W[out,in], b[out]},
/// lstm = {Wx[4H,in], Wh[4H,H], b[4H]} with gate order (input, forget,
/// candidate, output).
std::size_t block_count(LayerKind kind) noexcept;
std::vector<std::vector<std::size_t>> block_shapes(const LayerSpec& layer);

/// Parameters of a network: one Tensor per block, layers in order.
class NetworkParams {
 public:
  NetworkParams() = default;
  /// Zero-filled parameters for `arch`.
  explicit NetworkParams(Architecture arch);
  /// Validates block shapes against `arch`.
  NetworkParams(Architecture arch, std::vector<Tensor> blocks);

  const Architecture& architecture() const noexcept { return arch_; }
  std::size_t num_layers() const noexcept { return arch_.layers.size(); }
  const LayerSpec& layer(std::size_t i) const { return arch_.layers.at(i); }

  std::vector<Tensor>& blocks() noexcept { return blocks_; }
  const std::vector<Tensor>& blocks() const noexcept { return blocks_; }

  /// Index of the first block owned by layer `i`.
  std::size_t first_block(std::size_t i) const { return first_block_.at(i); }
  Tensor& block(std::size_t layer, std::size_t k) { return blocks_[first_block(layer) + k]; }
  const Tensor& block(std::size_t layer, std::size_t k) const { return blocks_[first_block(layer) + k]; }

  std::size_t num_values() const noexcept;
  bool all_finite() const noexcept;

  /// this += scale * other (same architecture).
  void add_scaled(const NetworkParams& other, double scale);
  void scale(double s) noexcept;
  void set_zero() noexcept;

  /// Concatenation of every block in order.
  std::vector<double> flatten() const;
  /// Inverse of flatten().
  void assign_flat(std::span<const double> flat);

  bool operator==(const NetworkParams& other) const {
    return arch_ == other.arch_ && blocks_ == other.blocks_;
  }

 private:
  void index_blocks();

  Architecture arch_;
  std::vector<Tensor> blocks_;
  std::vector<std::size_t> first_block_;
};

/// Seeded initialization: every weight matrix uniform in
/// +-sqrt(6 / (fan_in + fan_out)), biases zero, LSTM forget-gate bias 1.
NetworkParams init_params(const Architecture& arch, std::uint64_t seed);

/// Binary format: u64 LE header length, UTF-8 JSON header
/// {"format", "version", "architecture", "block_shapes"}, then every value
/// as a little-endian IEEE-754 double in block order.
std::vector<std::uint8_t> serialize(const NetworkParams& params);
NetworkParams deserialize(std::span<const std::uint8_t> bytes);
/// Same as deserialize() but reports how many bytes were consumed.
NetworkParams deserialize_prefix(std::span<const std::uint8_t> bytes, std::size_t& consumed);

}  // namespace cpw::diffcore
