#pragma once

#include <cstddef>
#include <vector>

namespace cpw {

/// Input feature vector with a discrete label.
struct LabeledExample {
  std::vector<double> x;
  std::size_t y = 0;

  bool operator==(const LabeledExample&) const = default;
};

using Dataset = std::vector<LabeledExample>;

/// Input feature vector with a scalar target.
struct RegressionPair {
  std::vector<double> x;
  double y = 0.0;

  bool operator==(const RegressionPair&) const = default;
};

}  // namespace cpw
