#include "cpw/learners/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>

#include "cpw/diffcore/mlp.hpp"
#include "cpw/error.hpp"

namespace cpw::learners {

using diffcore::NetworkParams;

namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kNoiseStream = 1;

void check_data(const Dataset& data, const NetworkParams& params) {
  if (data.empty()) throw DataError("training set is empty");
  const std::size_t classes = params.layer(params.num_layers() - 1).out;
  const std::size_t in = params.layer(0).in;
  for (const auto& ex : data) {
    if (ex.y >= classes) throw DataError("label " + std::to_string(ex.y) + " exceeds output arity");
    if (ex.x.size() != in) throw DimensionError("example arity does not match network input", 0);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (iterations == 0) throw ConfigError("iterations must be positive");
  if (!(langevin.temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (langevin.ensemble_size + langevin.burn_in < 1) throw ConfigError("Langevin chain is empty");
}

Dataset canonical_order(Dataset data) {
  std::sort(data.begin(), data.end(), [](const LabeledExample& a, const LabeledExample& b) {
    return std::tie(a.x, a.y) < std::tie(b.x, b.y);
  });
  return data;
}

NetworkParams gradient_descent(NetworkParams params, const Dataset& data, const TrainConfig& config,
                               std::vector<double>* loss_trace) {
  config.validate();
  check_data(data, params);
  const diffcore::Batch batch = diffcore::make_batch(canonical_order(data));
  const diffcore::LossHead head = diffcore::CrossEntropyHead{};
  diffcore::MlpWorkspace ws;
  NetworkParams grad(params.architecture());
  for (std::size_t step = 0; step < config.iterations; ++step) {
    const double loss = diffcore::loss_and_grad(params, batch, head, grad, ws);
    if (loss_trace) loss_trace->push_back(loss);
    params.add_scaled(grad, -config.learning_rate);
  }
  return params;
}

Predictor train_frequentist(const diffcore::Architecture& arch, const Dataset& data, const TrainConfig& config) {
  auto init = diffcore::init_params(arch, child_seed(config.seed, kInitStream));
  return Predictor::frequentist(gradient_descent(std::move(init), data, config));
}

NetworkParams fit_quantile_regressor(NetworkParams params, const std::vector<RegressionPair>& data, double q,
                                     const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw DataError("training set is empty");
  auto sorted = data;
  std::sort(sorted.begin(), sorted.end(), [](const RegressionPair& a, const RegressionPair& b) {
    return std::tie(a.x, a.y) < std::tie(b.x, b.y);
  });
  const diffcore::Batch batch = diffcore::make_batch(sorted);
  const diffcore::LossHead head = diffcore::PinballHead{q};
  diffcore::MlpWorkspace ws;
  NetworkParams grad(params.architecture());
  for (std::size_t step = 0; step < config.iterations; ++step) {
    diffcore::loss_and_grad(params, batch, head, grad, ws);
    params.add_scaled(grad, -config.learning_rate);
  }
  return params;
}

LangevinNoise::LangevinNoise(double learning_rate, double temperature, std::uint64_t seed)
    : stddev_(std::sqrt(2.0 * learning_rate / temperature)), rng_(seed) {}

void LangevinNoise::perturb(NetworkParams& params) {
  for (auto& t : params.blocks()) {
    for (double& v : t.values()) v += draw();
  }
}

std::vector<NetworkParams> langevin_chain(NetworkParams params, const Dataset& data, const TrainConfig& config,
                                          std::uint64_t noise_seed) {
  config.validate();
  check_data(data, params);
  const auto& lc = config.langevin;
  const diffcore::Batch batch = diffcore::make_batch(canonical_order(data));
  const diffcore::LossHead head = diffcore::CrossEntropyHead{};
  // Gradient of -(1/N) log N(phi; 0, I) is phi / N.
  const double prior_weight = 1.0 / static_cast<double>(data.size());
  LangevinNoise noise(config.learning_rate, lc.temperature, noise_seed);
  diffcore::MlpWorkspace ws;
  NetworkParams grad(params.architecture());
  std::vector<NetworkParams> samples;
  samples.reserve(lc.ensemble_size);
  const std::size_t total = lc.burn_in + lc.ensemble_size;
  for (std::size_t step = 0; step < total; ++step) {
    diffcore::loss_and_grad(params, batch, head, grad, ws);
    grad.add_scaled(params, prior_weight);
    params.add_scaled(grad, -config.learning_rate);
    noise.perturb(params);
    if (step >= lc.burn_in) samples.push_back(params);
  }
  return samples;
}

Predictor train_langevin(const diffcore::Architecture& arch, const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (config.langevin.ensemble_size == 0) throw ConfigError("ensemble size must be at least 1");
  auto init = diffcore::init_params(arch, child_seed(config.seed, kInitStream));
  return Predictor::bayesian(langevin_chain(std::move(init), data, config, child_seed(config.seed, kNoiseStream)));
}

}  // namespace cpw::learners
