#include "cpw/online/quantile_net.hpp"

#include <string>

#include "cpw/error.hpp"

namespace cpw::online {

using diffcore::LayerKind;
using diffcore::LayerSpec;
using diffcore::NetworkParams;

diffcore::Architecture quantile_net_architecture(const QuantileNetDescriptor& desc, std::size_t x_dim) {
  if (desc.lstm_layers == 0 || desc.lstm_hidden == 0) throw ConfigError("quantile net needs an LSTM stack");
  diffcore::Architecture arch;
  arch.family = kQuantileNetFamily;
  std::size_t prev = x_dim + 1;
  for (std::size_t h : desc.pre_hidden) {
    arch.layers.push_back({LayerKind::dense, prev, h, diffcore::Activation::relu});
    prev = h;
  }
  arch.layers.push_back({LayerKind::dense, prev, 1, diffcore::Activation::identity});
  prev = 1;
  for (std::size_t l = 0; l < desc.lstm_layers; ++l) {
    arch.layers.push_back({LayerKind::lstm, prev, desc.lstm_hidden, diffcore::Activation::identity});
    prev = desc.lstm_hidden;
  }
  prev = x_dim + desc.lstm_layers * desc.lstm_hidden;
  for (std::size_t h : desc.post_hidden) {
    arch.layers.push_back({LayerKind::dense, prev, h, diffcore::Activation::relu});
    prev = h;
  }
  arch.layers.push_back({LayerKind::dense, prev, 1, diffcore::Activation::identity});
  return arch;
}

QuantileNetLayout QuantileNetLayout::of(const NetworkParams& params) {
  const auto& arch = params.architecture();
  if (arch.family != kQuantileNetFamily) throw DimensionError("not a quantile_rnn architecture");
  QuantileNetLayout lay;
  const auto& layers = arch.layers;
  std::size_t i = 0;
  while (i < layers.size() && layers[i].kind == LayerKind::dense) ++i;
  lay.pre_end = i;
  while (i < layers.size() && layers[i].kind == LayerKind::lstm) ++i;
  lay.lstm_end = i;
  while (i < layers.size() && layers[i].kind == LayerKind::dense) ++i;
  lay.post_end = i;
  if (lay.pre_end == 0 || lay.lstm_end == lay.pre_end || lay.post_end == lay.lstm_end || i != layers.size()) {
    throw DimensionError("quantile_rnn layers must be dense+, lstm+, dense+");
  }
  if (layers[lay.pre_end - 1].out != 1 || layers[lay.pre_end].in != 1) {
    throw DimensionError("pre-MLP must emit one scalar per slot", lay.pre_end - 1);
  }
  lay.hidden = layers[lay.pre_end].out;
  for (std::size_t l = lay.pre_end + 1; l < lay.lstm_end; ++l) {
    if (layers[l].in != lay.hidden || layers[l].out != lay.hidden) {
      throw DimensionError("stacked LSTM layers must share the hidden size", l);
    }
  }
  const std::size_t lstm_count = lay.lstm_end - lay.pre_end;
  if (layers[0].in < 1 || layers[lay.lstm_end].in < lstm_count * lay.hidden) {
    throw DimensionError("post-MLP fan-in too small", lay.lstm_end);
  }
  lay.x_dim = layers[0].in - 1;
  if (layers[lay.lstm_end].in != lay.x_dim + lstm_count * lay.hidden) {
    throw DimensionError("post-MLP fan-in must be x_dim + layers * hidden", lay.lstm_end);
  }
  if (layers[lay.post_end - 1].out != 1) throw DimensionError("post-MLP must be scalar", lay.post_end - 1);
  return lay;
}

QuantileNetPass quantile_net_pass(const NetworkParams& params, const std::vector<RegressionPair>& window,
                                  std::span<const double> x) {
  QuantileNetPass pass;
  pass.layout = QuantileNetLayout::of(params);
  const auto& lay = pass.layout;
  if (window.empty()) throw DimensionError("empty history window");
  if (x.size() != lay.x_dim) {
    throw DimensionError("input length " + std::to_string(x.size()) + " but net expects " + std::to_string(lay.x_dim));
  }
  const std::size_t k_len = window.size();
  pass.pre_input.reserve(k_len * (lay.x_dim + 1));
  for (const auto& z : window) {
    if (z.x.size() != lay.x_dim) throw DimensionError("window pair has wrong input length", 0);
    pass.pre_input.insert(pass.pre_input.end(), z.x.begin(), z.x.end());
    pass.pre_input.push_back(z.y);
  }
  pass.w = diffcore::dense_stack_forward(params, 0, lay.pre_end, pass.pre_input, k_len, pass.pre_ws);

  std::vector<std::vector<double>> seq(k_len);
  for (std::size_t k = 0; k < k_len; ++k) seq[k] = {pass.w[k]};
  for (std::size_t l = lay.pre_end; l < lay.lstm_end; ++l) {
    pass.lstm.push_back(diffcore::lstm_sequence_forward(params, l, seq));
    for (std::size_t k = 0; k < k_len; ++k) seq[k] = pass.lstm.back()[k].h;
  }

  pass.post_input.assign(x.begin(), x.end());
  for (const auto& layer_steps : pass.lstm) {
    const auto& h = layer_steps.back().h;
    pass.post_input.insert(pass.post_input.end(), h.begin(), h.end());
  }
  pass.output = diffcore::dense_stack_forward(params, lay.lstm_end, lay.post_end, pass.post_input, 1, pass.post_ws)[0];
  return pass;
}

double quantile_net_forward(const NetworkParams& params, const std::vector<RegressionPair>& window,
                            std::span<const double> x) {
  return quantile_net_pass(params, window, x).output;
}

void quantile_net_backward(const NetworkParams& params, QuantileNetPass& pass, double dout, NetworkParams& grad) {
  const auto& lay = pass.layout;
  const std::size_t k_len = pass.w.size();
  const double d[1] = {dout};
  const auto d_post_in =
      diffcore::dense_stack_backward(params, lay.lstm_end, lay.post_end, pass.post_input, 1, d, grad, pass.post_ws);

  // Walk the LSTM stack top-down; each layer's input gradient becomes the
  // external h-gradient of the layer below.
  const std::size_t lstm_count = lay.lstm_end - lay.pre_end;
  std::vector<std::vector<double>> dh_out(k_len, std::vector<double>(lay.hidden, 0.0));
  for (std::size_t li = lstm_count; li-- > 0;) {
    const std::size_t offset = lay.x_dim + li * lay.hidden;
    for (std::size_t u = 0; u < lay.hidden; ++u) dh_out[k_len - 1][u] += d_post_in[offset + u];
    dh_out = diffcore::lstm_sequence_backward(params, lay.pre_end + li, pass.lstm[li], dh_out, grad);
  }

  std::vector<double> dw(k_len);
  for (std::size_t k = 0; k < k_len; ++k) dw[k] = dh_out[k][0];
  diffcore::dense_stack_backward(params, 0, lay.pre_end, pass.pre_input, k_len, dw, grad, pass.pre_ws);
}

}  // namespace cpw::online
