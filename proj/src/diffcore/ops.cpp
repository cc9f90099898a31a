#include "cpw/diffcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpw/error.hpp"

namespace cpw::diffcore {

std::string_view to_string(Activation act) noexcept {
  switch (act) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::selu: return "selu";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "selu") return Activation::selu;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

double activate(Activation act, double z) noexcept {
  switch (act) {
    case Activation::identity: return z;
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::selu: return z > 0.0 ? kSeluLambda * z : kSeluLambda * kSeluAlpha * std::expm1(z);
  }
  return z;
}

double activate_derivative(Activation act, double z) noexcept {
  switch (act) {
    case Activation::identity: return 1.0;
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::selu: return z > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(z);
  }
  return 1.0;
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double s, const double* x, double* y, std::size_t n) noexcept {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] += s * x[i];
}

std::vector<double> dense_forward(const Tensor& weight, const Tensor& bias,
                                  std::span<const double> input, Activation act,
                                  std::size_t layer_index) {
  if (weight.rank() != 2 || bias.rank() != 1 || bias.dim(0) != weight.dim(0)) {
    throw DimensionError("malformed dense block", layer_index);
  }
  if (input.size() != weight.dim(1)) {
    throw DimensionError("input length " + std::to_string(input.size()) + " but layer expects " +
                             std::to_string(weight.dim(1)),
                         layer_index);
  }
  std::vector<double> out(weight.dim(0));
  for (std::size_t o = 0; o < out.size(); ++o) {
    out[o] = activate(act, bias[o] + dot(weight.row(o).data(), input.data(), input.size()));
  }
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

double floored_neg_log(double p) noexcept { return -std::log(std::max(p, kProbabilityFloor)); }

double cross_entropy(std::span<const double> probabilities, std::size_t label) {
  if (label >= probabilities.size()) {
    throw DimensionError("label " + std::to_string(label) + " out of range for " +
                         std::to_string(probabilities.size()) + " classes");
  }
  return floored_neg_log(probabilities[label]);
}

namespace {
void check_level(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile level must lie in [0, 1]");
}
}  // namespace

double pinball_loss(double q, double y, double yhat) {
  check_level(q);
  const double r = y - yhat;
  return std::max(-(1.0 - q) * r, q * r);
}

double pinball_grad_yhat(double q, double y, double yhat) {
  check_level(q);
  return y >= yhat ? -q : 1.0 - q;
}

}  // namespace cpw::diffcore
