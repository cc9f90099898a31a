#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "cpw/diffcore/network.hpp"
#include "cpw/diffcore/tensor.hpp"
#include "cpw/types.hpp"

namespace cpw::diffcore {

/// Row-major input matrix plus targets. Classification batches fill
/// `labels`, regression batches fill `targets`.
struct Batch {
  std::size_t dim = 0;
  std::vector<double> x;
  std::vector<std::size_t> labels;
  std::vector<double> targets;

  std::size_t size() const noexcept { return dim == 0 ? labels.size() + targets.size() : x.size() / dim; }
  std::span<const double> row(std::size_t i) const noexcept { return {x.data() + i * dim, dim}; }
};

Batch make_batch(const Dataset& data);
Batch make_batch(const std::vector<RegressionPair>& data);

/// Mean cross-entropy of softmax(logits).
struct CrossEntropyHead {};
/// Mean pinball loss at level q on a scalar output.
struct PinballHead {
  double q = 0.5;
};
using LossHead = std::variant<CrossEntropyHead, PinballHead>;

/// Scratch buffers reused across gradient evaluations.
struct MlpWorkspace {
  std::vector<std::vector<double>> pre;   // per layer, n x out
  std::vector<std::vector<double>> post;  // per layer, n x out
  std::vector<std::vector<double>> wt;    // transposed weights, in x out
  std::vector<double> delta, delta_prev;
};

/// Outputs of the final (linear) layer for each of the n rows of `x`,
/// row-major n x out.
std::vector<double> mlp_forward_batch(const NetworkParams& params, std::span<const double> x, std::size_t n,
                                      MlpWorkspace& ws);
std::vector<double> mlp_forward_batch(const NetworkParams& params, std::span<const double> x, std::size_t n);
std::vector<double> mlp_forward(const NetworkParams& params, std::span<const double> x);

double mean_loss(const NetworkParams& params, const Batch& batch, const LossHead& head);

/// Reverse-mode gradient of the mean batch loss. `grad` is reshaped to the
/// architecture of `params` and overwritten. Returns the loss.
double loss_and_grad(const NetworkParams& params, const Batch& batch, const LossHead& head,
                     NetworkParams& grad, MlpWorkspace& ws);

struct LossGrad {
  double loss = 0.0;
  NetworkParams grad;
};
LossGrad loss_and_grad(const NetworkParams& params, const Batch& batch, const LossHead& head);

/// Backward pass through a dense stack given the gradient at its output
/// (`dout`, n x out). Uses the activations cached by the last
/// mlp_forward_batch call on `ws`; `first_layer`/`end_layer` select a
/// contiguous run of dense layers inside a larger network. Accumulates into
/// `grad` and returns the gradient with respect to the input rows.
std::vector<double> dense_stack_backward(const NetworkParams& params, std::size_t first_layer,
                                         std::size_t end_layer, std::span<const double> x, std::size_t n,
                                         std::span<const double> dout, NetworkParams& grad, MlpWorkspace& ws);

/// Forward through layers [first_layer, end_layer), caching into `ws`.
std::vector<double> dense_stack_forward(const NetworkParams& params, std::size_t first_layer,
                                        std::size_t end_layer, std::span<const double> x, std::size_t n,
                                        MlpWorkspace& ws);

/// Sum of squares of every parameter, and its gradient 2w.
double squared_norm(const NetworkParams& params) noexcept;
NetworkParams squared_norm_grad(const NetworkParams& params);

}  // namespace cpw::diffcore
