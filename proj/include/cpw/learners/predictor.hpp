#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cpw/diffcore/network.hpp"

namespace cpw::learners {

/// A trained classifier: one parameter vector (frequentist) or an ensemble
/// of posterior samples (bayesian). Immutable once built.
class Predictor {
 public:
  enum class Kind : std::uint8_t { frequentist = 0, bayesian = 1 };

  static Predictor frequentist(diffcore::NetworkParams params);
  /// Throws ConfigError for an empty ensemble or mixed architectures.
  static Predictor bayesian(std::vector<diffcore::NetworkParams> members);

  Kind kind() const noexcept { return kind_; }
  const std::vector<diffcore::NetworkParams>& members() const noexcept { return members_; }
  std::size_t input_dim() const;
  std::size_t num_classes() const;

  /// Predictive distribution: softmax of the single model, or the mean of
  /// the member softmaxes.
  std::vector<double> predict_distribution(std::span<const double> x) const;
  /// Same for n row-major inputs; returns n x num_classes.
  std::vector<double> predict_distribution_batch(std::span<const double> x, std::size_t n) const;

  bool operator==(const Predictor&) const = default;

 private:
  Predictor(Kind kind, std::vector<diffcore::NetworkParams> members)
      : kind_(kind), members_(std::move(members)) {}

  Kind kind_ = Kind::frequentist;
  std::vector<diffcore::NetworkParams> members_;
};

struct HardPrediction {
  std::size_t label = 0;
  double confidence = 0.0;
};

/// Argmax of the predictive distribution (lowest index on ties) and its
/// probability.
HardPrediction hard_prediction(std::span<const double> distribution);
HardPrediction hard_prediction(const Predictor& predictor, std::span<const double> x);

/// u8 kind, u64 LE member count, then the member blobs back to back.
std::vector<std::uint8_t> serialize(const Predictor& predictor);
Predictor deserialize_predictor(std::span<const std::uint8_t> bytes);

}  // namespace cpw::learners
