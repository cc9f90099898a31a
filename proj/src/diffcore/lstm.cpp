#include "cpw/diffcore/lstm.hpp"

#include <cmath>
#include <string>

#include "cpw/diffcore/ops.hpp"
#include "cpw/error.hpp"

namespace cpw::diffcore {

LstmStepCache lstm_cell_forward(const Tensor& wx, const Tensor& wh, const Tensor& b,
                                std::span<const double> x, std::span<const double> h,
                                std::span<const double> c, std::size_t layer_index) {
  const std::size_t hidden = wh.dim(1);
  if (wx.dim(0) != 4 * hidden || wh.dim(0) != 4 * hidden || b.size() != 4 * hidden) {
    throw DimensionError("malformed LSTM blocks", layer_index);
  }
  if (x.size() != wx.dim(1)) {
    throw DimensionError("LSTM input length " + std::to_string(x.size()) + " but layer expects " +
                             std::to_string(wx.dim(1)),
                         layer_index);
  }
  if (h.size() != hidden || c.size() != hidden) {
    throw DimensionError("LSTM state length must equal hidden size " + std::to_string(hidden), layer_index);
  }

  LstmStepCache s;
  s.x.assign(x.begin(), x.end());
  s.h_prev.assign(h.begin(), h.end());
  s.c_prev.assign(c.begin(), c.end());
  s.i.resize(hidden);
  s.f.resize(hidden);
  s.g.resize(hidden);
  s.o.resize(hidden);
  s.c.resize(hidden);
  s.tanh_c.resize(hidden);
  s.h.resize(hidden);

  const std::size_t in = x.size();
  for (std::size_t r = 0; r < 4 * hidden; ++r) {
    const double a = b[r] + dot(wx.data() + r * in, x.data(), in) + dot(wh.data() + r * hidden, h.data(), hidden);
    const std::size_t gate = r / hidden;
    const std::size_t u = r % hidden;
    switch (gate) {
      case 0: s.i[u] = sigmoid(a); break;
      case 1: s.f[u] = sigmoid(a); break;
      case 2: s.g[u] = std::tanh(a); break;
      default: s.o[u] = sigmoid(a); break;
    }
  }
  for (std::size_t u = 0; u < hidden; ++u) {
    s.c[u] = s.f[u] * c[u] + s.i[u] * s.g[u];
    s.tanh_c[u] = std::tanh(s.c[u]);
    s.h[u] = s.o[u] * s.tanh_c[u];
    if (!std::isfinite(s.h[u]) || !std::isfinite(s.c[u])) {
      throw NumericError("non-finite LSTM state", layer_index);
    }
  }
  return s;
}

LstmState lstm_cell(const Tensor& wx, const Tensor& wh, const Tensor& b, std::span<const double> x,
                    std::span<const double> h, std::span<const double> c, std::size_t layer_index) {
  LstmStepCache s = lstm_cell_forward(wx, wh, b, x, h, c, layer_index);
  return {std::move(s.h), std::move(s.c)};
}

void lstm_cell_backward(const LstmStepCache& s, const Tensor& wx, const Tensor& wh,
                        std::span<const double> dh, std::span<const double> dc, Tensor& dwx,
                        Tensor& dwh, Tensor& db, std::vector<double>& dx,
                        std::vector<double>& dh_prev, std::vector<double>& dc_prev) {
  const std::size_t hidden = s.h.size();
  const std::size_t in = s.x.size();
  std::vector<double> da(4 * hidden);
  dc_prev.assign(hidden, 0.0);
  for (std::size_t u = 0; u < hidden; ++u) {
    const double dc_total = dc[u] + dh[u] * s.o[u] * (1.0 - s.tanh_c[u] * s.tanh_c[u]);
    const double d_o = dh[u] * s.tanh_c[u];
    const double d_i = dc_total * s.g[u];
    const double d_g = dc_total * s.i[u];
    const double d_f = dc_total * s.c_prev[u];
    dc_prev[u] = dc_total * s.f[u];
    da[u] = d_i * s.i[u] * (1.0 - s.i[u]);
    da[hidden + u] = d_f * s.f[u] * (1.0 - s.f[u]);
    da[2 * hidden + u] = d_g * (1.0 - s.g[u] * s.g[u]);
    da[3 * hidden + u] = d_o * s.o[u] * (1.0 - s.o[u]);
  }
  dx.assign(in, 0.0);
  dh_prev.assign(hidden, 0.0);
  for (std::size_t r = 0; r < 4 * hidden; ++r) {
    const double g = da[r];
    db[r] += g;
    axpy(g, s.x.data(), dwx.data() + r * in, in);
    axpy(g, s.h_prev.data(), dwh.data() + r * hidden, hidden);
    axpy(g, wx.data() + r * in, dx.data(), in);
    axpy(g, wh.data() + r * hidden, dh_prev.data(), hidden);
  }
}

std::vector<LstmStepCache> lstm_sequence_forward(const NetworkParams& params, std::size_t layer,
                                                 const std::vector<std::vector<double>>& inputs) {
  const LayerSpec& spec = params.layer(layer);
  if (spec.kind != LayerKind::lstm) throw DimensionError("not an LSTM layer", layer);
  const Tensor& wx = params.block(layer, 0);
  const Tensor& wh = params.block(layer, 1);
  const Tensor& b = params.block(layer, 2);
  std::vector<LstmStepCache> steps;
  steps.reserve(inputs.size());
  std::vector<double> h(spec.out, 0.0);
  std::vector<double> c(spec.out, 0.0);
  for (const auto& x : inputs) {
    if (steps.empty()) {
      steps.push_back(lstm_cell_forward(wx, wh, b, x, h, c, layer));
    } else {
      const LstmStepCache& prev = steps.back();
      steps.push_back(lstm_cell_forward(wx, wh, b, x, prev.h, prev.c, layer));
    }
  }
  return steps;
}

std::vector<std::vector<double>> lstm_sequence_backward(const NetworkParams& params, std::size_t layer,
                                                        const std::vector<LstmStepCache>& steps,
                                                        const std::vector<std::vector<double>>& dh_out,
                                                        NetworkParams& grad) {
  const LayerSpec& spec = params.layer(layer);
  const Tensor& wx = params.block(layer, 0);
  const Tensor& wh = params.block(layer, 1);
  Tensor& dwx = grad.block(layer, 0);
  Tensor& dwh = grad.block(layer, 1);
  Tensor& db = grad.block(layer, 2);

  std::vector<std::vector<double>> dx(steps.size());
  std::vector<double> dh_next(spec.out, 0.0);
  std::vector<double> dc_next(spec.out, 0.0);
  std::vector<double> dh(spec.out);
  std::vector<double> dh_prev, dc_prev;
  for (std::size_t k = steps.size(); k-- > 0;) {
    for (std::size_t u = 0; u < spec.out; ++u) dh[u] = dh_next[u] + dh_out[k][u];
    lstm_cell_backward(steps[k], wx, wh, dh, dc_next, dwx, dwh, db, dx[k], dh_prev, dc_prev);
    dh_next.swap(dh_prev);
    dc_next.swap(dc_prev);
  }
  return dx;
}

}  // namespace cpw::diffcore
