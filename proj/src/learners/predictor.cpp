#include "cpw/learners/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpw/diffcore/mlp.hpp"
#include "cpw/diffcore/ops.hpp"
#include "cpw/error.hpp"

namespace cpw::learners {

using diffcore::NetworkParams;

Predictor Predictor::frequentist(NetworkParams params) {
  std::vector<NetworkParams> members;
  members.push_back(std::move(params));
  return Predictor(Kind::frequentist, std::move(members));
}

Predictor Predictor::bayesian(std::vector<NetworkParams> members) {
  if (members.empty()) throw ConfigError("bayesian predictor needs at least one member");
  for (const auto& m : members) {
    if (!(m.architecture() == members.front().architecture())) {
      throw ConfigError("ensemble members must share one architecture");
    }
  }
  return Predictor(Kind::bayesian, std::move(members));
}

std::size_t Predictor::input_dim() const { return members_.front().layer(0).in; }

std::size_t Predictor::num_classes() const {
  const auto& m = members_.front();
  return m.layer(m.num_layers() - 1).out;
}

std::vector<double> Predictor::predict_distribution_batch(std::span<const double> x, std::size_t n) const {
  const std::size_t in = input_dim();
  if (x.size() != n * in) {
    throw DimensionError("input arity " + std::to_string(n == 0 ? 0 : x.size() / n) + " but predictor expects " +
                         std::to_string(in));
  }
  const std::size_t classes = num_classes();
  std::vector<double> out(n * classes, 0.0);
  diffcore::MlpWorkspace ws;
  for (const auto& member : members_) {
    const auto logits = diffcore::mlp_forward_batch(member, x, n, ws);
    for (std::size_t r = 0; r < n; ++r) {
      const auto p = diffcore::softmax(std::span<const double>(logits.data() + r * classes, classes));
      for (std::size_t c = 0; c < classes; ++c) out[r * classes + c] += p[c];
    }
  }
  if (members_.size() > 1) {
    const double inv = 1.0 / static_cast<double>(members_.size());
    for (double& v : out) v *= inv;
  }
  return out;
}

std::vector<double> Predictor::predict_distribution(std::span<const double> x) const {
  return predict_distribution_batch(x, 1);
}

HardPrediction hard_prediction(std::span<const double> distribution) {
  if (distribution.empty()) throw DimensionError("empty distribution");
  HardPrediction best{0, distribution[0]};
  for (std::size_t c = 1; c < distribution.size(); ++c) {
    if (distribution[c] > best.confidence) best = {c, distribution[c]};
  }
  return best;
}

HardPrediction hard_prediction(const Predictor& predictor, std::span<const double> x) {
  const auto p = predictor.predict_distribution(x);
  return hard_prediction(p);
}

std::vector<std::uint8_t> serialize(const Predictor& predictor) {
  std::vector<std::uint8_t> out;
  out.push_back(static_cast<std::uint8_t>(predictor.kind()));
  const std::uint64_t count = predictor.members().size();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(count >> (8 * i)));
  for (const auto& m : predictor.members()) {
    const auto blob = diffcore::serialize(m);
    out.insert(out.end(), blob.begin(), blob.end());
  }
  return out;
}

Predictor deserialize_predictor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 9) throw DataError("truncated predictor blob");
  const auto kind = bytes[0];
  if (kind > 1) throw DataError("unknown predictor kind");
  std::uint64_t count = 0;
  for (int i = 0; i < 8; ++i) count |= std::uint64_t{bytes[1 + i]} << (8 * i);
  std::size_t pos = 9;
  std::vector<NetworkParams> members;
  for (std::uint64_t m = 0; m < count; ++m) {
    std::size_t used = 0;
    members.push_back(diffcore::deserialize_prefix(bytes.subspan(pos), used));
    pos += used;
  }
  if (pos != bytes.size()) throw DataError("trailing bytes after predictor blob");
  if (kind == 0) {
    if (members.size() != 1) throw DataError("frequentist predictor must have one member");
    return Predictor::frequentist(std::move(members.front()));
  }
  return Predictor::bayesian(std::move(members));
}

}  // namespace cpw::learners
