#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cpw/learners/predictor.hpp"
#include "cpw/types.hpp"

namespace cpw::conformal {

/// Sorted, duplicate-free subset of {0, ..., |Y|-1}.
struct PredictionSet {
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool contains(std::size_t label) const noexcept;
  bool operator==(const PredictionSet&) const = default;
};

PredictionSet full_set(std::size_t num_labels);

/// Closed interval [lo, hi]; crossed bounds give the empty interval.
struct PredictionInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = true;

  static PredictionInterval between(double lo, double hi) noexcept;

  /// hi - lo, or 0 when empty.
  double size() const noexcept { return empty ? 0.0 : hi - lo; }
  bool contains(double y) const noexcept { return !empty && lo <= y && y <= hi; }
  bool operator==(const PredictionInterval&) const = default;
};

enum class CvAlphaMode { alpha, alpha_half };

struct CPConfig {
  double alpha = 0.1;
  std::size_t folds = 4;
  CvAlphaMode cv_alpha_mode = CvAlphaMode::alpha;

  void validate() const;
  /// Miscoverage actually plugged into the cross-validation rule.
  double cv_alpha() const noexcept { return cv_alpha_mode == CvAlphaMode::alpha ? alpha : alpha / 2.0; }
};

/// Throws ConfigError unless 0 < alpha < 1.
void check_alpha(double alpha);

/// ceil((1 - alpha)(n + 1)) and floor(alpha (n + 1)). Products within 1e-9
/// of an integer are snapped to it first, so decimal alphas such as 0.7
/// behave as exact rationals.
std::size_t quantile_rank(std::size_t n, double alpha);
std::size_t cv_count_threshold(std::size_t n, double alpha);

/// The ceil((1-alpha)(n+1))-th smallest element of values + {+inf}; +inf
/// when the rank exceeds n.
double empirical_quantile_from_top(std::span<const double> values, double alpha);

/// Log-loss nonconformity score, floored like the training loss.
double nc_score(std::span<const double> distribution, std::size_t label);
double nc_score_logloss(const learners::Predictor& predictor, const LabeledExample& example);

/// Smallest set whose predictive mass reaches 1 - alpha, built greedily by
/// descending probability with ties to the lower label.
PredictionSet npb_set(std::span<const double> distribution, double alpha);

struct Split {
  Dataset train;
  Dataset validation;
};

/// Seeded shuffle, then even positions train and odd positions validate
/// (training gets the extra point when N is odd). Throws DataError if N < 2.
Split vb_split(const Dataset& data, std::uint64_t seed);

/// Seeded shuffle cut into `folds` contiguous blocks of N / K indices.
/// Throws ConfigError when K < 2 or K does not divide N.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t folds, std::uint64_t seed);

/// Labels whose score is <= threshold.
PredictionSet threshold_set(std::span<const double> candidate_scores, double threshold);

PredictionSet vb_cp_predict(const learners::Predictor& predictor, std::span<const double> validation_scores,
                            std::span<const double> x, double alpha);

/// Validation scores of a cross-validated ensemble, kept sorted per fold so
/// membership counts are binary searches.
class KcvCalibration {
 public:
  /// fold_scores[k] holds the scores of fold k under the model trained
  /// without fold k. Throws ConfigError unless there are at least two folds
  /// of equal size.
  explicit KcvCalibration(std::vector<std::vector<double>> fold_scores);

  std::size_t folds() const noexcept { return sorted_.size(); }
  std::size_t total() const noexcept { return total_; }

  /// Number of validation scores in fold k that are >= score.
  std::size_t count_at_least(std::size_t fold, double score) const;

  /// candidate_scores[k][y] is the score of label y under model k. Includes
  /// y iff sum_k #{validation scores in fold k >= candidate_scores[k][y]}
  /// >= floor(alpha (N + 1)).
  PredictionSet predict(const std::vector<std::vector<double>>& candidate_scores, double alpha) const;

 private:
  std::vector<std::vector<double>> sorted_;
  std::size_t total_ = 0;
};

PredictionSet kcv_cp_predict(std::span<const learners::Predictor> fold_models,
                             const std::vector<std::vector<double>>& fold_scores, std::span<const double> x,
                             double alpha);

/// [lo, hi] from two quantile estimates; empty when lo > hi.
PredictionInterval nqb_interval(double lo_estimate, double hi_estimate) noexcept;
/// Same, evaluating two scalar-output MLP quantile regressors at x.
PredictionInterval nqb_interval(const diffcore::NetworkParams& lo_model, const diffcore::NetworkParams& hi_model,
                                std::span<const double> x);

}  // namespace cpw::conformal
