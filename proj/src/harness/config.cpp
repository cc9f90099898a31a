#include "cpw/harness/config.hpp"

#include <fstream>
#include <set>

#include "cpw/error.hpp"
#include "cpw/scenarios/modclass.hpp"

namespace cpw::harness {

using nlohmann::json;

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::demod: return "demod";
    case Scenario::modclass: return "modclass";
    case Scenario::rss: return "rss";
  }
  return "?";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::naive: return "naive";
    case Method::vb: return "vb";
    case Method::kcv: return "kcv";
    case Method::cv: return "cv";
  }
  return "?";
}

std::string to_string(LearnerKind l) { return l == LearnerKind::freq ? "freq" : "bayes"; }

Scenario scenario_from_string(const std::string& s) {
  if (s == "demod") return Scenario::demod;
  if (s == "modclass") return Scenario::modclass;
  if (s == "rss") return Scenario::rss;
  throw ConfigError("unknown scenario '" + s + "'");
}

Method method_from_string(const std::string& s) {
  if (s == "naive") return Method::naive;
  if (s == "vb") return Method::vb;
  if (s == "kcv") return Method::kcv;
  if (s == "cv") return Method::cv;
  throw ConfigError("unknown method '" + s + "' (expected naive, vb, kcv or cv)");
}

LearnerKind learner_from_string(const std::string& s) {
  if (s == "freq") return LearnerKind::freq;
  if (s == "bayes") return LearnerKind::bayes;
  throw ConfigError("unknown learner '" + s + "' (expected freq or bayes)");
}

namespace {

SeriesSource source_from_string(const std::string& s) {
  if (s == "ar1") return SeriesSource::ar1;
  if (s == "shifted") return SeriesSource::shifted;
  if (s == "csv") return SeriesSource::csv;
  throw ConfigError("unknown series source '" + s + "' (expected ar1, shifted or csv)");
}

std::string to_string(SeriesSource s) {
  switch (s) {
    case SeriesSource::ar1: return "ar1";
    case SeriesSource::shifted: return "shifted";
    case SeriesSource::csv: return "csv";
  }
  return "?";
}

conformal::CvAlphaMode cv_mode_from_string(const std::string& s) {
  if (s == "alpha") return conformal::CvAlphaMode::alpha;
  if (s == "alpha_half") return conformal::CvAlphaMode::alpha_half;
  throw ConfigError("unknown cv_alpha_mode '" + s + "' (expected alpha or alpha_half)");
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_online(OnlineSettings& o, const json& j) {
  reject_unknown(j,
                 {"source", "csv", "length", "mean", "rho", "sigma", "period", "level_jump", "scale_jump", "warmup",
                  "gamma", "eta", "window", "pre_hidden", "lstm_hidden", "lstm_layers", "post_hidden"},
                 "online");
  if (j.contains("source")) o.source = source_from_string(j.at("source").get<std::string>());
  if (j.contains("csv")) o.csv_path = j.at("csv").get<std::string>();
  read(j, "length", o.ar1.length);
  read(j, "mean", o.ar1.mean);
  read(j, "rho", o.ar1.rho);
  read(j, "sigma", o.ar1.sigma);
  read(j, "period", o.shift_period);
  read(j, "level_jump", o.level_jump);
  read(j, "scale_jump", o.scale_jump);
  read(j, "warmup", o.warmup);
  read(j, "gamma", o.gamma);
  read(j, "eta", o.eta);
  read(j, "window", o.window);
  read(j, "pre_hidden", o.net.pre_hidden);
  read(j, "lstm_hidden", o.net.lstm_hidden);
  read(j, "lstm_layers", o.net.lstm_layers);
  read(j, "post_hidden", o.net.post_hidden);
}

}  // namespace

void ExperimentConfig::validate() const {
  conformal::check_alpha(alpha);
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (trials >= (1u << 20)) throw ConfigError("trials must be below 2^20");
  train.validate();
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (scenario == Scenario::rss) {
    if (!(online.gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
    if (!(online.eta > 0.0)) throw ConfigError("eta must be positive");
    if (online.window < 1) throw ConfigError("window must be at least 1");
    if (online.source != SeriesSource::csv && online.ar1.length <= online.warmup) {
      throw ConfigError("series length must exceed the warmup");
    }
    if (online.source == SeriesSource::csv && online.csv_path.empty()) throw ConfigError("csv source needs a path");
    return;
  }
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (learners.empty()) throw ConfigError("at least one learner is required");
  if (n_grid.empty()) throw ConfigError("the N grid is empty");
  if (n_test < 1) throw ConfigError("n_test must be at least 1");
  if (scenario == Scenario::modclass && corpus) {
    if (corpus->label_names.empty()) throw ConfigError("corpus has no labels");
    for (std::size_t n : n_grid) {
      if (n + n_test > corpus->examples.size()) {
        throw ConfigError("corpus of " + std::to_string(corpus->examples.size()) + " examples cannot supply N + n_test = " +
                          std::to_string(n + n_test));
      }
    }
  } else if (scenario == Scenario::modclass) {
    if (!corpus_path.empty()) throw ConfigError("corpus_path is set but the corpus was not loaded");
    scenarios::ModclassConfig mc{modulations, sequence_length, 1.0, 1};
    mc.validate();
  }
  for (std::size_t n : n_grid) {
    if (n < 1 || n >= (1u << 20)) throw ConfigError("every N must lie in [1, 2^20)");
    for (Method m : methods) {
      if (m == Method::vb && n < 2) throw ConfigError("VB-CP needs N >= 2");
      if (m == Method::kcv) {
        if (folds < 2) throw ConfigError("K-CV-CP needs K >= 2");
        if (n % folds != 0) {
          throw ConfigError("K = " + std::to_string(folds) + " does not divide N = " + std::to_string(n));
        }
      }
      if (m == Method::cv) {
        if (n < 2) throw ConfigError("CV-CP needs N >= 2");
        if (n > max_cv_n) {
          throw ConfigError("CV-CP at N = " + std::to_string(n) + " exceeds max_cv_n = " + std::to_string(max_cv_n));
        }
      }
    }
  }
}

std::size_t ExperimentConfig::num_labels() const {
  if (scenario == Scenario::modclass && corpus) return corpus->label_names.size();
  return scenario == Scenario::modclass ? modulations.size() : 8;
}

std::size_t ExperimentConfig::input_dim() const {
  if (scenario == Scenario::modclass && corpus) return corpus->example_len;
  return scenario == Scenario::modclass ? 2 * sequence_length : 2;
}

diffcore::Architecture ExperimentConfig::architecture() const {
  return diffcore::mlp_architecture(input_dim(), hidden, num_labels(), hidden_activation);
}

ExperimentConfig default_config(Scenario scenario) {
  ExperimentConfig c;
  c.scenario = scenario;
  if (scenario == Scenario::modclass) {
    c.hidden = {64, 64};
    c.hidden_activation = diffcore::Activation::selu;
    c.train.learning_rate = 0.02;
    c.train.iterations = 400;
    c.n_grid = {400};
    c.n_test = 200;
    c.trials = 10;
    c.methods = {Method::naive, Method::vb, Method::kcv};
    c.output = "modclass.csv";
  } else if (scenario == Scenario::rss) {
    c.output = "online.csv";
  }
  return c;
}

ExperimentConfig apply_json(ExperimentConfig c, const json& j) {
  try {
    reject_unknown(j,
                   {"scenario", "methods", "learners", "alpha", "n_grid", "n_test", "trials", "folds", "cv_alpha_mode",
                    "seed", "output", "snr_db", "max_cv_n", "threads", "record_wall_time", "train", "hidden",
                    "hidden_activation", "modulations", "sequence_length", "corpus", "online"},
                   "config");
    if (j.contains("scenario")) c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(method_from_string(m.get<std::string>()));
    }
    if (j.contains("learners")) {
      c.learners.clear();
      for (const auto& l : j.at("learners")) c.learners.push_back(learner_from_string(l.get<std::string>()));
    }
    read(j, "alpha", c.alpha);
    read(j, "n_grid", c.n_grid);
    read(j, "n_test", c.n_test);
    read(j, "trials", c.trials);
    read(j, "folds", c.folds);
    if (j.contains("cv_alpha_mode")) c.cv_alpha_mode = cv_mode_from_string(j.at("cv_alpha_mode").get<std::string>());
    read(j, "seed", c.seed);
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    read(j, "snr_db", c.snr_db);
    read(j, "max_cv_n", c.max_cv_n);
    read(j, "threads", c.threads);
    read(j, "record_wall_time", c.record_wall_time);
    if (j.contains("train")) {
      const json& t = j.at("train");
      reject_unknown(t, {"learning_rate", "iterations", "temperature", "ensemble_size", "burn_in"}, "train");
      read(t, "learning_rate", c.train.learning_rate);
      read(t, "iterations", c.train.iterations);
      read(t, "temperature", c.train.langevin.temperature);
      read(t, "ensemble_size", c.train.langevin.ensemble_size);
      read(t, "burn_in", c.train.langevin.burn_in);
    }
    read(j, "hidden", c.hidden);
    if (j.contains("hidden_activation")) {
      c.hidden_activation = diffcore::activation_from_string(j.at("hidden_activation").get<std::string>());
    }
    read(j, "modulations", c.modulations);
    read(j, "sequence_length", c.sequence_length);
    if (j.contains("corpus")) c.corpus_path = j.at("corpus").get<std::string>();
    if (j.contains("online")) apply_online(c.online, j.at("online"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

void attach_corpus(ExperimentConfig& config) {
  if (config.corpus_path.empty()) return;
  config.corpus = std::make_shared<const scenarios::ModCorpus>(scenarios::load_corpus(config.corpus_path));
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return apply_json(std::move(base), j);
}

json to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  json learners = json::array();
  for (LearnerKind l : c.learners) learners.push_back(to_string(l));
  const auto& o = c.online;
  return {{"scenario", to_string(c.scenario)},
          {"methods", methods},
          {"learners", learners},
          {"alpha", c.alpha},
          {"n_grid", c.n_grid},
          {"n_test", c.n_test},
          {"trials", c.trials},
          {"folds", c.folds},
          {"cv_alpha_mode", c.cv_alpha_mode == conformal::CvAlphaMode::alpha ? "alpha" : "alpha_half"},
          {"seed", c.seed},
          {"output", c.output.string()},
          {"snr_db", c.snr_db},
          {"max_cv_n", c.max_cv_n},
          {"threads", c.threads},
          {"record_wall_time", c.record_wall_time},
          {"train",
           {{"learning_rate", c.train.learning_rate},
            {"iterations", c.train.iterations},
            {"temperature", c.train.langevin.temperature},
            {"ensemble_size", c.train.langevin.ensemble_size},
            {"burn_in", c.train.langevin.burn_in}}},
          {"hidden", c.hidden},
          {"hidden_activation", std::string(diffcore::to_string(c.hidden_activation))},
          {"modulations", c.modulations},
          {"sequence_length", c.sequence_length},
          {"corpus", c.corpus_path.string()},
          {"online",
           {{"source", to_string(o.source)},
            {"csv", o.csv_path.string()},
            {"length", o.ar1.length},
            {"mean", o.ar1.mean},
            {"rho", o.ar1.rho},
            {"sigma", o.ar1.sigma},
            {"period", o.shift_period},
            {"level_jump", o.level_jump},
            {"scale_jump", o.scale_jump},
            {"warmup", o.warmup},
            {"gamma", o.gamma},
            {"eta", o.eta},
            {"window", o.window},
            {"pre_hidden", o.net.pre_hidden},
            {"lstm_hidden", o.net.lstm_hidden},
            {"lstm_layers", o.net.lstm_layers},
            {"post_hidden", o.net.post_hidden}}}};
}

}  // namespace cpw::harness
