#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpw/conformal/sets.hpp"
#include "cpw/diffcore/network.hpp"
#include "cpw/learners/training.hpp"
#include "cpw/online/quantile_net.hpp"
#include "cpw/scenarios/modclass.hpp"
#include "cpw/scenarios/rss.hpp"

namespace cpw::harness {

enum class Scenario { demod, modclass, rss };
enum class Method { naive, vb, kcv, cv };
enum class LearnerKind { freq, bayes };

std::string to_string(Scenario s);
std::string to_string(Method m);
std::string to_string(LearnerKind l);
Scenario scenario_from_string(const std::string& s);
Method method_from_string(const std::string& s);
LearnerKind learner_from_string(const std::string& s);

/// Where the online experiment gets its series.
enum class SeriesSource { ar1, shifted, csv };

struct OnlineSettings {
  SeriesSource source = SeriesSource::ar1;
  std::filesystem::path csv_path;
  scenarios::Ar1Config ar1{0.0, 0.9, 1.0, 20000, std::nullopt};
  std::size_t shift_period = 500;
  double level_jump = 4.0;
  double scale_jump = 2.0;
  std::size_t warmup = 1000;
  double gamma = 0.03;
  double eta = 0.01;
  std::size_t window = 20;
  online::QuantileNetDescriptor net;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::demod;
  std::vector<Method> methods{Method::naive, Method::vb, Method::kcv, Method::cv};
  std::vector<LearnerKind> learners{LearnerKind::freq};
  double alpha = 0.1;
  std::vector<std::size_t> n_grid{20};
  std::size_t n_test = 100;
  std::size_t trials = 50;
  std::size_t folds = 4;  // K
  conformal::CvAlphaMode cv_alpha_mode = conformal::CvAlphaMode::alpha;
  std::uint64_t seed = 0;
  std::filesystem::path output = "metrics.csv";
  double snr_db = 5.0;
  std::size_t max_cv_n = 200;
  std::size_t threads = 1;
  /// When false the wall_time column is written as 0, making output files
  /// byte-identical across runs.
  bool record_wall_time = true;

  learners::TrainConfig train;  // seed is ignored; every model gets a derived one
  std::vector<std::size_t> hidden{10, 30, 30};
  diffcore::Activation hidden_activation = diffcore::Activation::relu;

  std::vector<std::string> modulations{"BPSK", "QPSK", "8PSK", "16QAM"};
  std::size_t sequence_length = 16;
  /// External modulation corpus; when set, modclass trials draw disjoint
  /// train/test subsets from it instead of simulating.
  std::filesystem::path corpus_path;
  std::shared_ptr<const scenarios::ModCorpus> corpus;

  OnlineSettings online;

  /// Throws ConfigError on any inconsistency (alpha outside (0, 1), no
  /// trials, K not dividing some N, CV above max_cv_n, ...).
  void validate() const;

  conformal::CPConfig cp_config() const { return {alpha, folds, cv_alpha_mode}; }
  std::size_t num_labels() const;
  std::size_t input_dim() const;
  diffcore::Architecture architecture() const;
};

/// Scenario defaults: the demodulation MLP (2-10-30-30-8, ReLU, 120 GD steps
/// at 0.2); a SELU MLP with a smaller rate for modulation classification.
ExperimentConfig default_config(Scenario scenario);

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
ExperimentConfig apply_json(ExperimentConfig base, const nlohmann::json& j);
/// Loads config.corpus_path into config.corpus (no-op when empty).
void attach_corpus(ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base);
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace cpw::harness
