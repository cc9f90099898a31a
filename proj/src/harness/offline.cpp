#include "cpw/harness/offline.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include "cpw/error.hpp"
#include "cpw/random.hpp"
#include "cpw/scenarios/channel.hpp"
#include "cpw/scenarios/modclass.hpp"

namespace cpw::harness {

using conformal::PredictionSet;
using learners::Predictor;

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_u64(std::uint64_t& h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffu;
    h *= kFnvPrime;
  }
}

void fnv_dataset(std::uint64_t& h, const Dataset& data) {
  fnv_u64(h, data.size());
  for (const auto& ex : data) {
    fnv_u64(h, ex.x.size());
    for (double v : ex.x) fnv_u64(h, std::bit_cast<std::uint64_t>(v));
    fnv_u64(h, ex.y);
  }
}

std::uint32_t narrow(std::size_t v) { return static_cast<std::uint32_t>(v); }

Stream model_stream(Method m) {
  switch (m) {
    case Method::naive: return Stream::model_naive;
    case Method::vb: return Stream::model_vb;
    case Method::kcv: return Stream::model_kcv;
    case Method::cv: return Stream::model_cv;
  }
  return Stream::model;
}

// Distinguishes the split/partition streams of the three calibrated methods.
std::uint32_t split_slot(Method m) {
  switch (m) {
    case Method::vb: return 0;
    case Method::kcv: return 1;
    case Method::cv: return 2;
    case Method::naive: break;
  }
  return 3;
}

std::vector<double> flatten_inputs(const Dataset& data) {
  std::vector<double> flat;
  if (!data.empty()) flat.reserve(data.size() * data.front().x.size());
  for (const auto& ex : data) flat.insert(flat.end(), ex.x.begin(), ex.x.end());
  return flat;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::filesystem::path temp_path(const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  return tmp;
}

}  // namespace

std::uint64_t dataset_hash(const Dataset& train, const Dataset& test) {
  std::uint64_t h = kFnvOffset;
  fnv_dataset(h, train);
  fnv_dataset(h, test);
  return h;
}

TrialData make_trial_data(const ExperimentConfig& config, std::size_t trial, std::size_t n) {
  const double snr = scenarios::db_to_linear(config.snr_db);
  Rng rng(derive_seed(config.seed, {narrow(trial), narrow(n), 0, Stream::data}));
  TrialData d;
  if (config.scenario == Scenario::modclass && config.corpus) {
    const auto& pool = config.corpus->examples;
    if (n + config.n_test > pool.size()) throw ConfigError("corpus too small for N + n_test");
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n; ++i) d.train.push_back(pool[order[i]]);
    for (std::size_t i = n; i < n + config.n_test; ++i) d.test.push_back(pool[order[i]]);
  } else if (config.scenario == Scenario::modclass) {
    scenarios::ModclassConfig mc{config.modulations, config.sequence_length, snr, n + config.n_test};
    Dataset all = scenarios::gen_modclass_dataset(mc, rng);
    d.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
    d.test.assign(all.begin() + static_cast<std::ptrdiff_t>(n), all.end());
  } else if (config.scenario == Scenario::demod) {
    const scenarios::ChannelState state = scenarios::sample_channel_state(rng);
    d.train = scenarios::gen_demod_dataset(state, snr, n, rng);
    Rng test_rng(derive_seed(config.seed, {narrow(trial), narrow(n), 0, Stream::test_data}));
    d.test = scenarios::gen_demod_dataset(state, snr, config.n_test, test_rng);
  } else {
    throw ConfigError("offline trials need the demod or modclass scenario");
  }
  d.hash = dataset_hash(d.train, d.test);
  return d;
}

SetMetrics evaluate_sets(const std::vector<PredictionSet>& sets, const Dataset& test) {
  if (test.empty()) throw DataError("test set is empty");
  if (sets.size() != test.size()) throw DimensionError("one prediction set per test example is required");
  std::size_t covered = 0;
  std::size_t total_size = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    covered += sets[i].contains(test[i].y) ? 1 : 0;
    total_size += sets[i].size();
  }
  const double m = static_cast<double>(test.size());
  return {static_cast<double>(covered) / m, static_cast<double>(total_size) / m};
}

conformal::Trainer make_trainer(const ExperimentConfig& config, Method method, LearnerKind learner, std::size_t trial,
                                std::size_t n) {
  const auto arch = config.architecture();
  const auto base = config.train;
  const std::uint64_t master = config.seed;
  const Stream stream = model_stream(method);
  return [=](const Dataset& data, std::size_t fold) -> Predictor {
    learners::TrainConfig tc = base;
    tc.seed = derive_seed(master, {narrow(trial), narrow(n), narrow(fold), stream});
    return learner == LearnerKind::freq ? learners::train_frequentist(arch, data, tc)
                                        : learners::train_langevin(arch, data, tc);
  };
}

std::vector<PredictionSet> predict_sets(const ExperimentConfig& config, Method method,
                                        const conformal::Trainer& trainer, const Dataset& train, const Dataset& test,
                                        std::size_t trial) {
  const std::size_t n = train.size();
  const std::size_t m = test.size();
  const std::vector<double> x = flatten_inputs(test);
  const std::uint64_t split_seed =
      derive_seed(config.seed, {narrow(trial), narrow(n), split_slot(method), Stream::split});
  std::vector<PredictionSet> sets;
  sets.reserve(m);

  switch (method) {
    case Method::naive: {
      const Predictor model = trainer(train, 0);
      const std::size_t classes = model.num_classes();
      const std::vector<double> dist = model.predict_distribution_batch(x, m);
      for (std::size_t i = 0; i < m; ++i) {
        sets.push_back(conformal::npb_set(std::span<const double>(dist).subspan(i * classes, classes), config.alpha));
      }
      break;
    }
    case Method::vb: {
      const conformal::VbModel vb = conformal::fit_vb(train, trainer, split_seed);
      const double threshold = conformal::empirical_quantile_from_top(vb.validation_scores, config.alpha);
      for (const auto& row : conformal::candidate_scores(vb.model, x, m)) {
        sets.push_back(conformal::threshold_set(row, threshold));
      }
      break;
    }
    case Method::kcv:
    case Method::cv: {
      const std::size_t folds = method == Method::cv ? n : config.folds;
      conformal::KcvModel kcv = conformal::fit_kcv(train, folds, trainer, split_seed);
      const conformal::KcvCalibration calibration(std::move(kcv.fold_scores));
      std::vector<std::vector<std::vector<double>>> per_model;  // [k][i][y]
      per_model.reserve(kcv.models.size());
      for (const auto& model : kcv.models) per_model.push_back(conformal::candidate_scores(model, x, m));
      std::vector<std::vector<double>> scores(kcv.models.size());
      const double cv_alpha = config.cp_config().cv_alpha();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < per_model.size(); ++k) scores[k] = std::move(per_model[k][i]);
        sets.push_back(calibration.predict(scores, cv_alpha));
      }
      break;
    }
  }
  return sets;
}

std::vector<MetricsRow> run_offline_trial(const ExperimentConfig& config, std::size_t trial, std::size_t n,
                                          std::vector<std::vector<PredictionSet>>* sets) {
  const TrialData data = make_trial_data(config, trial, n);
  std::vector<MetricsRow> rows;
  if (sets) sets->clear();
  for (LearnerKind learner : config.learners) {
    for (Method method : config.methods) {
      const auto start = std::chrono::steady_clock::now();
      const auto trainer = make_trainer(config, method, learner, trial, n);
      auto predicted = predict_sets(config, method, trainer, data.train, data.test, trial);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      const SetMetrics metrics = evaluate_sets(predicted, data.test);
      rows.push_back({config.scenario, method, learner, n, trial, metrics.coverage, metrics.inefficiency,
                      config.record_wall_time ? elapsed.count() : 0.0, data.hash});
      if (sets) sets->push_back(std::move(predicted));
    }
  }
  return rows;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsHeaderComment << '\n' << kMetricsColumns << '\n';
  for (const auto& r : rows) {
    out << to_string(r.scenario) << ',' << to_string(r.method) << ',' << to_string(r.learner) << ',' << r.n << ','
        << r.trial << ',' << format_double(r.empirical_coverage) << ',' << format_double(r.empirical_inefficiency)
        << ',' << format_double(r.wall_time) << ',' << hex64(r.dataset_hash) << '\n';
  }
}

double standard_error(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double n = static_cast<double>(values.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

std::vector<GroupSummary> summarize(const std::vector<MetricsRow>& rows) {
  struct Acc {
    GroupSummary key;
    std::vector<double> coverage;
    std::vector<double> inefficiency;
  };
  std::vector<Acc> groups;
  for (const auto& r : rows) {
    Acc* acc = nullptr;
    for (auto& g : groups) {
      if (g.key.method == r.method && g.key.learner == r.learner && g.key.n == r.n) acc = &g;
    }
    if (!acc) {
      groups.push_back({});
      acc = &groups.back();
      acc->key.method = r.method;
      acc->key.learner = r.learner;
      acc->key.n = r.n;
    }
    acc->coverage.push_back(r.empirical_coverage);
    acc->inefficiency.push_back(r.empirical_inefficiency);
  }
  std::vector<GroupSummary> out;
  for (const auto& g : groups) {
    GroupSummary s = g.key;
    s.trials = g.coverage.size();
    s.mean_coverage = mean_of(g.coverage);
    s.se_coverage = standard_error(g.coverage);
    s.mean_inefficiency = mean_of(g.inefficiency);
    s.se_inefficiency = standard_error(g.inefficiency);
    out.push_back(s);
  }
  return out;
}

nlohmann::json summary_json(const std::vector<MetricsRow>& rows) {
  nlohmann::json j = nlohmann::json::object();
  std::vector<Method> order;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
  }
  for (Method m : order) {
    std::vector<double> cov;
    std::vector<double> ineff;
    for (const auto& r : rows) {
      if (r.method != m) continue;
      cov.push_back(r.empirical_coverage);
      ineff.push_back(r.empirical_inefficiency);
    }
    j[to_string(m)] = {{"mean_coverage", mean_of(cov)}, {"mean_inefficiency", mean_of(ineff)}};
  }
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : summarize(rows)) {
    groups.push_back({{"method", to_string(g.method)},
                      {"learner", to_string(g.learner)},
                      {"n", g.n},
                      {"trials", g.trials},
                      {"mean_coverage", g.mean_coverage},
                      {"se_coverage", g.se_coverage},
                      {"mean_inefficiency", g.mean_inefficiency},
                      {"se_inefficiency", g.se_inefficiency}});
  }
  j["groups"] = groups;
  return j;
}

void check_writable(const std::filesystem::path& path) {
  const auto tmp = temp_path(path);
  {
    std::ofstream probe(tmp, std::ios::binary | std::ios::trunc);
    if (!probe) throw ConfigError("output path not writable: " + path.string());
  }
  std::error_code ec;
  std::filesystem::remove(tmp, ec);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  const auto tmp = temp_path(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("output path not writable: " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw ConfigError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::vector<MetricsRow> sweep_offline(const ExperimentConfig& config) {
  config.validate();
  std::filesystem::path summary_path = config.output;
  summary_path += ".summary.json";
  check_writable(config.output);
  check_writable(summary_path);

  struct Job {
    std::size_t n;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (std::size_t n : config.n_grid) {
    for (std::size_t t = 0; t < config.trials; ++t) jobs.push_back({n, t});
  }
  std::vector<std::vector<MetricsRow>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        results[j] = run_offline_trial(config, jobs[j].trial, jobs[j].n);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const std::size_t workers = std::min(config.threads, jobs.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<MetricsRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  std::ostringstream csv;
  write_metrics_csv(csv, rows);
  write_file_atomic(config.output, csv.str());
  write_file_atomic(summary_path, summary_json(rows).dump(2) + "\n");
  return rows;
}

}  // namespace cpw::harness
