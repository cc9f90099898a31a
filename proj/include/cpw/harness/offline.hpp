#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpw/conformal/calibration.hpp"
#include "cpw/conformal/sets.hpp"
#include "cpw/harness/config.hpp"
#include "cpw/types.hpp"

namespace cpw::harness {

struct TrialData {
  Dataset train;
  Dataset test;
  std::uint64_t hash = 0;  // FNV-1a over both sets
};

/// Fresh channel state and datasets for (trial, N); a pure function of
/// (config, trial, n), shared by every method and learner.
TrialData make_trial_data(const ExperimentConfig& config, std::size_t trial, std::size_t n);

std::uint64_t dataset_hash(const Dataset& train, const Dataset& test);

struct SetMetrics {
  double coverage = 0.0;     // fraction of test labels inside their set
  double inefficiency = 0.0; // mean set size
};

/// sets[i] is the prediction for test[i]. Throws DimensionError on a length
/// mismatch and DataError on an empty test set.
SetMetrics evaluate_sets(const std::vector<conformal::PredictionSet>& sets, const Dataset& test);

struct MetricsRow {
  Scenario scenario = Scenario::demod;
  Method method = Method::naive;
  LearnerKind learner = LearnerKind::freq;
  std::size_t n = 0;
  std::size_t trial = 0;
  double empirical_coverage = 0.0;
  double empirical_inefficiency = 0.0;
  double wall_time = 0.0;  // seconds for training + prediction
  std::uint64_t dataset_hash = 0;
};

/// Trainer for one (method, learner) cell; fold k of the call gets its own
/// derived model seed. Frequentist and Bayesian cells with the same method
/// share seeds, so their initializations are paired.
conformal::Trainer make_trainer(const ExperimentConfig& config, Method method, LearnerKind learner, std::size_t trial,
                                std::size_t n);

/// Prediction sets of one method on `test`, trained from `train`.
std::vector<conformal::PredictionSet> predict_sets(const ExperimentConfig& config, Method method,
                                                   const conformal::Trainer& trainer, const Dataset& train,
                                                   const Dataset& test, std::size_t trial);

/// One row per (method, learner) of the config, in config order (learners
/// outer). If `sets` is given it receives the per-example sets, row-aligned.
std::vector<MetricsRow> run_offline_trial(const ExperimentConfig& config, std::size_t trial, std::size_t n,
                                          std::vector<std::vector<conformal::PredictionSet>>* sets = nullptr);

inline constexpr const char* kMetricsHeaderComment = "# cpw-metrics v1";
inline constexpr const char* kMetricsColumns =
    "scenario,method,learner,n,trial,empirical_coverage,empirical_inefficiency,wall_time,dataset_hash";

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

struct GroupSummary {
  Method method = Method::naive;
  LearnerKind learner = LearnerKind::freq;
  std::size_t n = 0;
  std::size_t trials = 0;
  double mean_coverage = 0.0;
  double se_coverage = 0.0;
  double mean_inefficiency = 0.0;
  double se_inefficiency = 0.0;
};

/// Mean and standard error per (method, learner, N), in first-seen order.
std::vector<GroupSummary> summarize(const std::vector<MetricsRow>& rows);
/// {method: {mean_coverage, mean_inefficiency}, ..., "groups": [...]}.
nlohmann::json summary_json(const std::vector<MetricsRow>& rows);

/// Writes `path` via a temporary file and a rename, so readers never see a
/// partial file. Throws ConfigError when the location is not writable.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
/// Throws ConfigError unless a file can be created next to `path`.
void check_writable(const std::filesystem::path& path);

/// Runs every (N, trial) cell (on config.threads workers), then writes the
/// CSV to config.output and the summary to `<output>.summary.json`. Rows are
/// ordered by N, trial, learner, method regardless of scheduling.
std::vector<MetricsRow> sweep_offline(const ExperimentConfig& config);

/// Sample standard error of the mean.
double standard_error(const std::vector<double>& values);

}  // namespace cpw::harness
