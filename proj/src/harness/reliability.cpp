#include "cpw/harness/reliability.hpp"

#include <algorithm>
#include <cmath>

#include "cpw/error.hpp"

namespace cpw::harness {

std::size_t reliability_bin_index(double confidence, std::size_t num_classes, std::size_t bins) {
  const double floor = 1.0 / static_cast<double>(num_classes);
  const double width = (1.0 - floor) / static_cast<double>(bins);
  if (!(width > 0.0) || confidence <= floor) return 0;
  const double k = std::floor((confidence - floor) / width);
  return std::min(bins - 1, static_cast<std::size_t>(k));
}

std::vector<ReliabilityBin> reliability_diagram(std::span<const double> distributions, std::size_t num_classes,
                                                std::span<const std::size_t> labels, std::size_t bins) {
  if (bins < 1) throw ConfigError("at least one bin is required");
  if (labels.empty()) throw DataError("test set is empty");
  if (num_classes < 1 || distributions.size() != labels.size() * num_classes) {
    throw DimensionError("distributions must hold one row of num_classes per label");
  }
  const double floor = 1.0 / static_cast<double>(num_classes);
  const double width = (1.0 - floor) / static_cast<double>(bins);
  std::vector<ReliabilityBin> out(bins);
  std::vector<double> conf_sum(bins, 0.0);
  std::vector<std::size_t> correct(bins, 0);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = floor + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? 1.0 : floor + width * static_cast<double>(b + 1);
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = distributions.subspan(i * num_classes, num_classes);
    const auto top = std::max_element(row.begin(), row.end());  // first maximum
    const std::size_t label = static_cast<std::size_t>(top - row.begin());
    const std::size_t b = reliability_bin_index(*top, num_classes, bins);
    ++out[b].count;
    conf_sum[b] += *top;
    correct[b] += label == labels[i] ? 1 : 0;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    if (out[b].count == 0) continue;
    const double c = static_cast<double>(out[b].count);
    out[b].mean_confidence = conf_sum[b] / c;
    out[b].accuracy = static_cast<double>(correct[b]) / c;
  }
  return out;
}

std::vector<ReliabilityBin> reliability_diagram(const learners::Predictor& predictor, const Dataset& test,
                                                std::size_t bins) {
  if (test.empty()) throw DataError("test set is empty");
  std::vector<double> x;
  std::vector<std::size_t> labels;
  for (const auto& ex : test) {
    x.insert(x.end(), ex.x.begin(), ex.x.end());
    labels.push_back(ex.y);
  }
  const auto dist = predictor.predict_distribution_batch(x, test.size());
  return reliability_diagram(dist, predictor.num_classes(), labels, bins);
}

}  // namespace cpw::harness
