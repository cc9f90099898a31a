#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpw/conformal/sets.hpp"
#include "cpw/diffcore/mlp.hpp"
#include "cpw/error.hpp"
#include "cpw/harness/config.hpp"
#include "cpw/harness/offline.hpp"
#include "cpw/harness/online.hpp"
#include "cpw/learners/training.hpp"
#include "cpw/scenarios/channel.hpp"

namespace {

using namespace cpw;
using harness::ExperimentConfig;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

// Flag values are held as optionals so that only flags actually given
// override the config file.
struct OfflineFlags {
  std::optional<double> alpha;
  std::vector<std::size_t> n_train;
  std::optional<std::size_t> n_test;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> folds;
  std::vector<std::string> methods;
  std::vector<std::string> learners;
  std::optional<double> snr_db;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> config;
  std::optional<std::size_t> max_cv_n;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> seq_len;
  std::optional<std::string> corpus;
  std::optional<std::string> cv_alpha_mode;
  bool no_wall_time = false;
};

struct OnlineFlags {
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> config;
  std::optional<std::string> source;
  std::optional<std::string> csv;
  std::optional<std::size_t> length;
  std::optional<std::size_t> warmup;
  std::optional<double> gamma;
  std::optional<double> eta;
  std::optional<std::size_t> window;
  std::optional<double> rho;
  bool no_wall_time = false;
};

void add_offline_flags(CLI::App* app, OfflineFlags& f, bool modclass) {
  app->add_option("--alpha", f.alpha, "Target miscoverage in (0, 1)");
  app->add_option("--n-train", f.n_train, "Training-set sizes N (one or more)");
  app->add_option("--n-test", f.n_test, "Test points per trial");
  app->add_option("--trials", f.trials, "Independent trials per N");
  app->add_option("--folds", f.folds, "K for K-CV-CP");
  app->add_option("--method", f.methods, "naive, vb, kcv, cv (repeatable or comma separated)")->delimiter(',');
  app->add_option("--learner", f.learners, "freq, bayes or both (comma separated)")->delimiter(',');
  app->add_option("--snr-db", f.snr_db, "Signal-to-noise ratio in dB");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--out", f.out, "Metrics CSV path (summary goes to <out>.summary.json)");
  app->add_option("--config", f.config, "JSON config file; flags override it");
  app->add_option("--max-cv-n", f.max_cv_n, "Largest N for which CV-CP may run");
  app->add_option("--threads", f.threads, "Worker threads for trials");
  app->add_option("--cv-alpha-mode", f.cv_alpha_mode, "alpha or alpha_half")
      ->check(CLI::IsMember({"alpha", "alpha_half"}));
  app->add_flag("--no-wall-time", f.no_wall_time, "Write 0 in the wall_time column (byte-reproducible output)");
  if (modclass) {
    app->add_option("--seq-len", f.seq_len, "Symbols per synthetic example");
    app->add_option("--corpus", f.corpus, "Stem of an external <stem>.f32 + <stem>.json corpus");
  }
}

void add_online_flags(CLI::App* app, OnlineFlags& f) {
  app->add_option("--alpha", f.alpha, "Target miscoverage in (0, 1)");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--out", f.out, "Output stem: <stem>.rci.csv, <stem>.nqb.csv, <stem>.summary.json");
  app->add_option("--config", f.config, "JSON config file; flags override it");
  app->add_option("--source", f.source, "ar1, shifted or csv");
  app->add_option("--csv", f.csv, "RSS CSV (index,channel_id,rss); implies --source csv");
  app->add_option("--length", f.length, "Synthetic series length");
  app->add_option("--warmup", f.warmup, "Steps excluded from the time averages");
  app->add_option("--gamma", f.gamma, "Calibration step size (0 disables calibration)");
  app->add_option("--eta", f.eta, "Quantile-network learning rate");
  app->add_option("--window", f.window, "History window K");
  app->add_option("--rho", f.rho, "AR(1) coefficient of the synthetic series");
  app->add_flag("--no-wall-time", f.no_wall_time, "Write 0 wall times in the summary");
}

template <typename T>
void set_if(const std::optional<T>& v, T& out) {
  if (v) out = *v;
}

ExperimentConfig offline_config(harness::Scenario scenario, const OfflineFlags& f) {
  ExperimentConfig c = harness::default_config(scenario);
  if (f.config) c = harness::load_config(*f.config, c);
  c.scenario = scenario;
  set_if(f.alpha, c.alpha);
  if (!f.n_train.empty()) c.n_grid = f.n_train;
  set_if(f.n_test, c.n_test);
  set_if(f.trials, c.trials);
  set_if(f.folds, c.folds);
  if (!f.methods.empty()) {
    c.methods.clear();
    for (const auto& m : f.methods) c.methods.push_back(harness::method_from_string(m));
  }
  if (!f.learners.empty()) {
    c.learners.clear();
    for (const auto& l : f.learners) {
      if (l == "both") {
        c.learners.push_back(harness::LearnerKind::freq);
        c.learners.push_back(harness::LearnerKind::bayes);
      } else {
        c.learners.push_back(harness::learner_from_string(l));
      }
    }
  }
  set_if(f.snr_db, c.snr_db);
  set_if(f.seed, c.seed);
  if (f.out) c.output = *f.out;
  set_if(f.max_cv_n, c.max_cv_n);
  set_if(f.threads, c.threads);
  set_if(f.seq_len, c.sequence_length);
  if (f.corpus) c.corpus_path = *f.corpus;
  if (f.cv_alpha_mode) {
    c.cv_alpha_mode = *f.cv_alpha_mode == "alpha" ? conformal::CvAlphaMode::alpha : conformal::CvAlphaMode::alpha_half;
  }
  if (f.no_wall_time) c.record_wall_time = false;
  harness::attach_corpus(c);
  c.validate();
  return c;
}

ExperimentConfig online_config(const OnlineFlags& f) {
  ExperimentConfig c = harness::default_config(harness::Scenario::rss);
  if (f.config) c = harness::load_config(*f.config, c);
  c.scenario = harness::Scenario::rss;
  set_if(f.alpha, c.alpha);
  set_if(f.seed, c.seed);
  if (f.out) c.output = *f.out;
  if (f.source) {
    if (*f.source == "ar1") c.online.source = harness::SeriesSource::ar1;
    else if (*f.source == "shifted") c.online.source = harness::SeriesSource::shifted;
    else if (*f.source == "csv") c.online.source = harness::SeriesSource::csv;
    else throw ConfigError("unknown source '" + *f.source + "'");
  }
  if (f.csv) {
    c.online.csv_path = *f.csv;
    c.online.source = harness::SeriesSource::csv;
  }
  set_if(f.length, c.online.ar1.length);
  set_if(f.warmup, c.online.warmup);
  set_if(f.gamma, c.online.gamma);
  set_if(f.eta, c.online.eta);
  set_if(f.window, c.online.window);
  set_if(f.rho, c.online.ar1.rho);
  if (f.no_wall_time) c.record_wall_time = false;
  c.validate();
  return c;
}

void print_offline(const std::vector<harness::MetricsRow>& rows, const ExperimentConfig& c) {
  std::printf("%-6s %-6s %6s %7s %10s %8s %12s %8s\n", "method", "learner", "N", "trials", "coverage", "+-se",
              "inefficiency", "+-se");
  for (const auto& g : harness::summarize(rows)) {
    std::printf("%-6s %-6s %6zu %7zu %10.4f %8.4f %12.4f %8.4f\n", harness::to_string(g.method).c_str(),
                harness::to_string(g.learner).c_str(), g.n, g.trials, g.mean_coverage, g.se_coverage,
                g.mean_inefficiency, g.se_inefficiency);
  }
  std::printf("wrote %s\n", c.output.string().c_str());
}

int run_offline(harness::Scenario scenario, const OfflineFlags& f) {
  const ExperimentConfig c = offline_config(scenario, f);
  print_offline(harness::sweep_offline(c), c);
  return 0;
}

int run_online(const OnlineFlags& f) {
  const ExperimentConfig c = online_config(f);
  const auto r = harness::run_online_from_config(c);
  std::printf("RCI  coverage %.4f  inefficiency %.4f  (%zu steps after warmup)\n", r.rci_average.coverage,
              r.rci_average.inefficiency, r.rci_average.steps);
  std::printf("NQB  coverage %.4f  inefficiency %.4f\n", r.nqb_average.coverage, r.nqb_average.inefficiency);
  std::printf("inefficiency ratio RCI/NQB %.4f\n", r.inefficiency_ratio);
  return 0;
}

// A few fast end-to-end sanity checks of an installed binary.
int run_selftest() {
  int failures = 0;
  auto check = [&](bool ok, const char* what) {
    std::printf("%s  %s\n", ok ? "ok  " : "FAIL", what);
    failures += ok ? 0 : 1;
  };

  const auto points = scenarios::apsk8_constellation();
  check(std::abs(scenarios::mean_energy(points) - 1.0) < 1e-12, "8-APSK has unit mean energy");

  const std::vector<double> values{1.0, 2.0, 3.0, 4.0};
  check(conformal::empirical_quantile_from_top(values, 0.4) == 3.0, "quantile from top picks the 3rd smallest");

  const std::vector<double> dist{0.5, 0.3, 0.2};
  check(conformal::npb_set(dist, 0.25).labels == std::vector<std::size_t>{0, 1}, "NPB set keeps the top two labels");

  const auto arch = diffcore::mlp_architecture(2, {4}, 3, diffcore::Activation::selu);
  auto params = diffcore::init_params(arch, 7);
  const Dataset data{{{0.3, -0.2}, 1}, {{-0.7, 0.4}, 2}};
  const auto batch = diffcore::make_batch(data);
  const auto lg = diffcore::loss_and_grad(params, batch, diffcore::CrossEntropyHead{});
  auto flat = params.flatten();
  double worst = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double h = 1e-6;
    const double keep = flat[i];
    flat[i] = keep + h;
    params.assign_flat(flat);
    const double up = diffcore::mean_loss(params, batch, diffcore::CrossEntropyHead{});
    flat[i] = keep - h;
    params.assign_flat(flat);
    const double down = diffcore::mean_loss(params, batch, diffcore::CrossEntropyHead{});
    flat[i] = keep;
    const double fd = (up - down) / (2 * h);
    const double g = lg.grad.flatten()[i];
    worst = std::max(worst, std::abs(fd - g) / std::max(1e-8, std::abs(fd) + std::abs(g)));
  }
  check(worst < 1e-4, "cross-entropy gradient matches finite differences");

  ExperimentConfig c = harness::default_config(harness::Scenario::demod);
  c.trials = 1;
  c.n_grid = {8};
  c.n_test = 20;
  c.methods = {harness::Method::vb, harness::Method::kcv};
  const auto rows = harness::run_offline_trial(c, 0, 8);
  check(rows.size() == 2 && rows[0].dataset_hash == rows[1].dataset_hash, "methods in a trial share the dataset");

  std::printf("%s\n", failures == 0 ? "selftest passed" : "selftest FAILED");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal prediction for wireless signal processing"};
  app.require_subcommand(1);
  OfflineFlags demod_flags;
  OfflineFlags modclass_flags;
  OnlineFlags online_flags;
  auto* demod = app.add_subcommand("demod", "Coverage/inefficiency sweep on the synthetic demodulation channel");
  add_offline_flags(demod, demod_flags, false);
  auto* modclass = app.add_subcommand("modclass", "Sweep on synthetic (or ingested) modulation classification");
  add_offline_flags(modclass, modclass_flags, true);
  auto* rss = app.add_subcommand("rss-online", "Rolling conformal intervals vs the naive quantile baseline");
  add_online_flags(rss, online_flags);
  auto* selftest = app.add_subcommand("selftest", "Quick internal consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*demod) return run_offline(harness::Scenario::demod, demod_flags);
    if (*modclass) return run_offline(harness::Scenario::modclass, modclass_flags);
    if (*rss) return run_online(online_flags);
    if (*selftest) return run_selftest();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
