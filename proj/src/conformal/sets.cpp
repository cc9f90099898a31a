#include "cpw/conformal/sets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cpw/diffcore/mlp.hpp"
#include "cpw/diffcore/ops.hpp"
#include "cpw/error.hpp"
#include "cpw/random.hpp"

namespace cpw::conformal {

namespace {

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v)) ? r : v;
}

}  // namespace

bool PredictionSet::contains(std::size_t label) const noexcept {
  return std::binary_search(labels.begin(), labels.end(), label);
}

PredictionSet full_set(std::size_t num_labels) {
  PredictionSet s;
  s.labels.resize(num_labels);
  std::iota(s.labels.begin(), s.labels.end(), std::size_t{0});
  return s;
}

PredictionInterval PredictionInterval::between(double lo, double hi) noexcept {
  if (lo > hi) return {lo, hi, true};
  return {lo, hi, false};
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

void CPConfig::validate() const {
  check_alpha(alpha);
  if (folds < 2) throw ConfigError("need at least 2 folds");
}

std::size_t quantile_rank(std::size_t n, double alpha) {
  check_alpha(alpha);
  return static_cast<std::size_t>(std::ceil(snap((1.0 - alpha) * static_cast<double>(n + 1))));
}

std::size_t cv_count_threshold(std::size_t n, double alpha) {
  check_alpha(alpha);
  return static_cast<std::size_t>(std::floor(snap(alpha * static_cast<double>(n + 1))));
}

double empirical_quantile_from_top(std::span<const double> values, double alpha) {
  const std::size_t rank = quantile_rank(values.size(), alpha);
  if (rank > values.size()) return std::numeric_limits<double>::infinity();
  std::vector<double> v(values.begin(), values.end());
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank - 1), v.end());
  return v[rank - 1];
}

double nc_score(std::span<const double> distribution, std::size_t label) {
  return diffcore::cross_entropy(distribution, label);
}

double nc_score_logloss(const learners::Predictor& predictor, const LabeledExample& example) {
  if (example.y >= predictor.num_classes()) throw DimensionError("label exceeds predictor arity");
  return nc_score(predictor.predict_distribution(example.x), example.y);
}

PredictionSet npb_set(std::span<const double> distribution, double alpha) {
  std::vector<std::size_t> order(distribution.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return distribution[a] > distribution[b]; });
  const double target = 1.0 - alpha;
  PredictionSet s;
  double mass = 0.0;
  for (std::size_t label : order) {
    if (mass >= target) break;
    s.labels.push_back(label);
    mass += distribution[label];
  }
  std::sort(s.labels.begin(), s.labels.end());
  return s;
}

Split vb_split(const Dataset& data, std::uint64_t seed) {
  if (data.size() < 2) throw DataError("validation split needs at least 2 examples");
  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  Split s;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    (i % 2 == 0 ? s.train : s.validation).push_back(data[perm[i]]);
  }
  return s;
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("need at least 2 folds");
  if (n % folds != 0) {
    throw ConfigError("fold count " + std::to_string(folds) + " does not divide N = " + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t per = n / folds;
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t k = 0; k < folds; ++k) {
    out[k].assign(perm.begin() + static_cast<std::ptrdiff_t>(k * per),
                  perm.begin() + static_cast<std::ptrdiff_t>((k + 1) * per));
  }
  return out;
}

PredictionSet threshold_set(std::span<const double> candidate_scores, double threshold) {
  PredictionSet s;
  for (std::size_t y = 0; y < candidate_scores.size(); ++y) {
    if (candidate_scores[y] <= threshold) s.labels.push_back(y);
  }
  return s;
}

PredictionSet vb_cp_predict(const learners::Predictor& predictor, std::span<const double> validation_scores,
                            std::span<const double> x, double alpha) {
  const double threshold = empirical_quantile_from_top(validation_scores, alpha);
  const auto p = predictor.predict_distribution(x);
  std::vector<double> scores(p.size());
  for (std::size_t y = 0; y < p.size(); ++y) scores[y] = nc_score(p, y);
  return threshold_set(scores, threshold);
}

KcvCalibration::KcvCalibration(std::vector<std::vector<double>> fold_scores) : sorted_(std::move(fold_scores)) {
  if (sorted_.size() < 2) throw ConfigError("need at least 2 folds");
  for (auto& fold : sorted_) {
    if (fold.size() != sorted_.front().size()) throw ConfigError("folds must have equal size");
    std::sort(fold.begin(), fold.end());
    total_ += fold.size();
  }
}

std::size_t KcvCalibration::count_at_least(std::size_t fold, double score) const {
  const auto& f = sorted_.at(fold);
  return static_cast<std::size_t>(f.end() - std::lower_bound(f.begin(), f.end(), score));
}

PredictionSet KcvCalibration::predict(const std::vector<std::vector<double>>& candidate_scores,
                                      double alpha) const {
  if (candidate_scores.size() != sorted_.size()) throw DimensionError("one score row per fold required");
  const std::size_t threshold = cv_count_threshold(total_, alpha);
  const std::size_t labels = candidate_scores.front().size();
  PredictionSet s;
  for (std::size_t y = 0; y < labels; ++y) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < sorted_.size(); ++k) count += count_at_least(k, candidate_scores[k][y]);
    if (count >= threshold) s.labels.push_back(y);
  }
  return s;
}

PredictionSet kcv_cp_predict(std::span<const learners::Predictor> fold_models,
                             const std::vector<std::vector<double>>& fold_scores, std::span<const double> x,
                             double alpha) {
  if (fold_models.size() != fold_scores.size()) throw DimensionError("one model per fold required");
  KcvCalibration cal(fold_scores);
  std::vector<std::vector<double>> candidates;
  for (const auto& model : fold_models) {
    const auto p = model.predict_distribution(x);
    std::vector<double> row(p.size());
    for (std::size_t y = 0; y < p.size(); ++y) row[y] = nc_score(p, y);
    candidates.push_back(std::move(row));
  }
  return cal.predict(candidates, alpha);
}

PredictionInterval nqb_interval(double lo_estimate, double hi_estimate) noexcept {
  return PredictionInterval::between(lo_estimate, hi_estimate);
}

PredictionInterval nqb_interval(const diffcore::NetworkParams& lo_model, const diffcore::NetworkParams& hi_model,
                                std::span<const double> x) {
  const auto lo = diffcore::mlp_forward(lo_model, x);
  const auto hi = diffcore::mlp_forward(hi_model, x);
  if (lo.size() != 1 || hi.size() != 1) throw DimensionError("quantile models must have a scalar output");
  return nqb_interval(lo[0], hi[0]);
}

}  // namespace cpw::conformal
