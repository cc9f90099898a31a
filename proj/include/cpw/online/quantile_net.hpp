#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cpw/diffcore/lstm.hpp"
#include "cpw/diffcore/mlp.hpp"
#include "cpw/diffcore/network.hpp"
#include "cpw/types.hpp"

namespace cpw::online {

/// Shape of the windowed recurrent quantile regressor: a per-pair
/// pre-processing MLP producing one scalar per window slot, a stack of LSTM
/// layers over the K slots, and a post-processing MLP on
/// [x, h_K(layer 1), ..., h_K(layer L)] producing the quantile estimate.
struct QuantileNetDescriptor {
  std::vector<std::size_t> pre_hidden{16, 32};
  std::size_t lstm_hidden = 32;
  std::size_t lstm_layers = 2;
  std::vector<std::size_t> post_hidden{32};

  bool operator==(const QuantileNetDescriptor&) const = default;
};

inline constexpr const char* kQuantileNetFamily = "quantile_rnn";

/// Hidden dense layers use ReLU; the pre- and post-MLP outputs are linear.
diffcore::Architecture quantile_net_architecture(const QuantileNetDescriptor& desc, std::size_t x_dim);

/// Layer ranges of a quantile_rnn architecture. Throws DimensionError on a
/// descriptor mismatch.
struct QuantileNetLayout {
  std::size_t pre_end = 0;     // pre-MLP is [0, pre_end)
  std::size_t lstm_end = 0;    // LSTM stack is [pre_end, lstm_end)
  std::size_t post_end = 0;    // post-MLP is [lstm_end, post_end)
  std::size_t x_dim = 0;
  std::size_t hidden = 0;

  static QuantileNetLayout of(const diffcore::NetworkParams& params);
};

/// Cached forward pass through the quantile net.
struct QuantileNetPass {
  QuantileNetLayout layout;
  std::vector<double> pre_input;   // K x (x_dim + 1)
  std::vector<double> w;           // pre-MLP output per slot
  std::vector<std::vector<diffcore::LstmStepCache>> lstm;  // per LSTM layer
  std::vector<double> post_input;  // x_dim + L * hidden
  double output = 0.0;
  diffcore::MlpWorkspace pre_ws, post_ws;
};

/// Forward through the net. `window` must hold exactly K pairs (oldest
/// first); LSTM states start from zero.
QuantileNetPass quantile_net_pass(const diffcore::NetworkParams& params, const std::vector<RegressionPair>& window,
                                  std::span<const double> x);

double quantile_net_forward(const diffcore::NetworkParams& params, const std::vector<RegressionPair>& window,
                            std::span<const double> x);

/// Accumulates d(output)/d(params) * dout into `grad`.
void quantile_net_backward(const diffcore::NetworkParams& params, QuantileNetPass& pass, double dout,
                           diffcore::NetworkParams& grad);

}  // namespace cpw::online
