#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "cpw/diffcore/network.hpp"
#include "cpw/learners/predictor.hpp"
#include "cpw/random.hpp"
#include "cpw/types.hpp"

namespace cpw::learners {

struct LangevinConfig {
  double temperature = 20.0;
  std::size_t ensemble_size = 20;  // R
  std::size_t burn_in = 100;       // R_min
};

struct TrainConfig {
  double learning_rate = 0.2;
  std::size_t iterations = 120;
  LangevinConfig langevin;
  std::uint64_t seed = 0;

  /// Throws ConfigError on non-positive rates, zero iterations, or an
  /// empty Langevin chain.
  void validate() const;
};

/// Sorts examples lexicographically by (x, y). Full-batch sums are then
/// accumulated in an order that depends only on the multiset of examples.
Dataset canonical_order(Dataset data);

/// Full-batch gradient descent on the mean cross-entropy, starting from
/// `init`. If `loss_trace` is given, the loss before every step is appended.
diffcore::NetworkParams gradient_descent(diffcore::NetworkParams init, const Dataset& data,
                                         const TrainConfig& config, std::vector<double>* loss_trace = nullptr);

/// Seeded initialization followed by gradient_descent().
Predictor train_frequentist(const diffcore::Architecture& arch, const Dataset& data, const TrainConfig& config);

/// Full-batch gradient descent on the mean pinball loss at level q for a
/// scalar-output network; estimates the conditional q-quantile.
diffcore::NetworkParams fit_quantile_regressor(diffcore::NetworkParams init, const std::vector<RegressionPair>& data,
                                               double q, const TrainConfig& config);

/// Per-coordinate Gaussian perturbation with variance 2 * eta / T.
class LangevinNoise {
 public:
  LangevinNoise(double learning_rate, double temperature, std::uint64_t seed);

  double variance() const noexcept { return stddev_ * stddev_; }
  double draw() { return stddev_ * normal_(rng_); }
  void perturb(diffcore::NetworkParams& params);

 private:
  double stddev_;
  Rng rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Langevin MC from `init`: burn_in + ensemble_size iterations of
///   phi <- phi - eta * grad(L_D(phi) + |phi|^2 / (2N)) + N(0, 2 eta / T)
/// returning the last ensemble_size iterates. `noise_seed` drives the
/// perturbations.
std::vector<diffcore::NetworkParams> langevin_chain(diffcore::NetworkParams init, const Dataset& data,
                                                    const TrainConfig& config, std::uint64_t noise_seed);

/// Seeded initialization followed by langevin_chain().
Predictor train_langevin(const diffcore::Architecture& arch, const Dataset& data, const TrainConfig& config);

}  // namespace cpw::learners
