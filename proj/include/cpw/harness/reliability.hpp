#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cpw/learners/predictor.hpp"
#include "cpw/types.hpp"

namespace cpw::harness {

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  double mean_confidence = 0.0;  // 0 for an empty bin
  double accuracy = 0.0;         // 0 for an empty bin
  std::size_t count = 0;
};

/// Equal-width confidence bins over [1/|Y|, 1]; the last bin is closed.
/// `distributions` holds labels.size() rows of num_classes probabilities.
/// Throws DataError on an empty test set, ConfigError when bins is 0.
std::vector<ReliabilityBin> reliability_diagram(std::span<const double> distributions, std::size_t num_classes,
                                                std::span<const std::size_t> labels, std::size_t bins);
std::vector<ReliabilityBin> reliability_diagram(const learners::Predictor& predictor, const Dataset& test,
                                                std::size_t bins);

/// Bin of a confidence value in a diagram with `bins` bins.
std::size_t reliability_bin_index(double confidence, std::size_t num_classes, std::size_t bins);

}  // namespace cpw::harness
