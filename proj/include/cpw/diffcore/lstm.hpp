#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cpw/diffcore/network.hpp"
#include "cpw/diffcore/tensor.hpp"

namespace cpw::diffcore {

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

/// Everything a cell step needs for its backward pass.
struct LstmStepCache {
  std::vector<double> x, h_prev, c_prev;
  std::vector<double> i, f, g, o;  // gate activations
  std::vector<double> c, tanh_c, h;
};

/// One LSTM cell step:
///   i = s(a_i), f = s(a_f), g = tanh(a_g), o = s(a_o), a = Wx x + Wh h + b
///   c' = f * c + i * g,  h' = o * tanh(c')
LstmState lstm_cell(const Tensor& wx, const Tensor& wh, const Tensor& b, std::span<const double> x,
                    std::span<const double> h, std::span<const double> c, std::size_t layer_index = 0);

LstmStepCache lstm_cell_forward(const Tensor& wx, const Tensor& wh, const Tensor& b,
                                std::span<const double> x, std::span<const double> h,
                                std::span<const double> c, std::size_t layer_index = 0);

/// Backward through one step. Accumulates into dwx/dwh/db, overwrites
/// dx/dh_prev/dc_prev.
void lstm_cell_backward(const LstmStepCache& step, const Tensor& wx, const Tensor& wh,
                        std::span<const double> dh, std::span<const double> dc, Tensor& dwx,
                        Tensor& dwh, Tensor& db, std::vector<double>& dx,
                        std::vector<double>& dh_prev, std::vector<double>& dc_prev);

/// Runs layer `layer` of `params` over `inputs` from a zero state.
std::vector<LstmStepCache> lstm_sequence_forward(const NetworkParams& params, std::size_t layer,
                                                 const std::vector<std::vector<double>>& inputs);

/// Backpropagation through time. `dh_out[k]` is the loss gradient flowing
/// into h_k from outside the recurrence. Parameter gradients are accumulated
/// into `grad`; returns the gradient with respect to each input.
std::vector<std::vector<double>> lstm_sequence_backward(const NetworkParams& params, std::size_t layer,
                                                        const std::vector<LstmStepCache>& steps,
                                                        const std::vector<std::vector<double>>& dh_out,
                                                        NetworkParams& grad);

}  // namespace cpw::diffcore
