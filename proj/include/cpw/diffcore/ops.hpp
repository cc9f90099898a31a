#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "cpw/diffcore/tensor.hpp"

namespace cpw::diffcore {

enum class Activation { identity, relu, selu };

std::string_view to_string(Activation act) noexcept;
Activation activation_from_string(std::string_view name);

// Standard SELU constants.
inline constexpr double kSeluLambda = 1.05070098735548;
inline constexpr double kSeluAlpha = 1.67326324235437;

/// Floor applied to probabilities before taking logs, so that log-losses and
/// nonconformity scores stay finite for saturated predictors.
inline constexpr double kProbabilityFloor = 1e-12;

double activate(Activation act, double z) noexcept;
/// d activation / dz evaluated at the pre-activation z.
double activate_derivative(Activation act, double z) noexcept;

inline double sigmoid(double z) noexcept;

double dot(const double* a, const double* b, std::size_t n) noexcept;
/// y += s * x
void axpy(double s, const double* x, double* y, std::size_t n) noexcept;

/// activation(W * input + b) for one dense layer; W is [out, in], b is [out].
std::vector<double> dense_forward(const Tensor& weight, const Tensor& bias,
                                  std::span<const double> input, Activation act,
                                  std::size_t layer_index = 0);

/// Softmax with max-subtraction.
std::vector<double> softmax(std::span<const double> logits);

/// -log p[label], with p floored at kProbabilityFloor.
double cross_entropy(std::span<const double> probabilities, std::size_t label);

/// -log max(p, kProbabilityFloor).
double floored_neg_log(double p) noexcept;

/// max{-(1-q)(y-yhat), q(y-yhat)}.
double pinball_loss(double q, double y, double yhat);

/// d pinball / d yhat. At the kink y == yhat the residual-side slope q is
/// used, i.e. the result is -q.
double pinball_grad_yhat(double q, double y, double yhat);

}  // namespace cpw::diffcore

inline double cpw::diffcore::sigmoid(double z) noexcept {
  // Branches keep exp() from overflowing for large |z|.
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}
