#include "cpw/harness/online.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "cpw/error.hpp"
#include "cpw/harness/offline.hpp"
#include "cpw/random.hpp"
#include "cpw/scenarios/rss.hpp"

namespace cpw::harness {

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json average_json(const TimeAverage& a) {
  return {{"mean_coverage", a.coverage}, {"mean_inefficiency", a.inefficiency}, {"steps", a.steps}};
}

}  // namespace

TimeAverage time_average(const std::vector<online::RciRecord>& records, std::size_t warmup) {
  if (records.size() <= warmup) throw DataError("series is not longer than the warmup");
  TimeAverage a;
  double covered = 0.0;
  double size = 0.0;
  for (std::size_t i = warmup; i < records.size(); ++i) {
    covered += 1.0 - records[i].err;
    size += records[i].interval.size();
  }
  a.steps = records.size() - warmup;
  a.coverage = covered / static_cast<double>(a.steps);
  a.inefficiency = size / static_cast<double>(a.steps);
  return a;
}

OnlineResult run_online_experiment(const std::vector<RegressionPair>& series, const online::RciConfig& rci,
                                   std::size_t warmup, bool record_wall_time) {
  if (series.size() <= warmup) {
    throw DataError("series of length " + std::to_string(series.size()) + " is not longer than the warmup of " +
                    std::to_string(warmup));
  }
  OnlineResult r;
  online::RciConfig baseline = rci;
  baseline.gamma = 0.0;

  auto start = std::chrono::steady_clock::now();
  r.rci = online::run_rci(series, rci);
  const std::chrono::duration<double> rci_time = std::chrono::steady_clock::now() - start;
  start = std::chrono::steady_clock::now();
  r.nqb = online::run_rci(series, baseline);
  const std::chrono::duration<double> nqb_time = std::chrono::steady_clock::now() - start;
  if (record_wall_time) {
    r.rci_seconds = rci_time.count();
    r.nqb_seconds = nqb_time.count();
  }
  r.rci_average = time_average(r.rci, warmup);
  r.nqb_average = time_average(r.nqb, warmup);
  r.inefficiency_ratio = r.nqb_average.inefficiency > 0.0 ? r.rci_average.inefficiency / r.nqb_average.inefficiency
                                                          : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::vector<RegressionPair> load_series(const ExperimentConfig& config) {
  const OnlineSettings& o = config.online;
  std::vector<scenarios::RssRecord> records;
  Rng rng(derive_seed(config.seed, {0, 0, 0, Stream::data}));
  switch (o.source) {
    case SeriesSource::ar1:
      records = scenarios::synth_rss(o.ar1, rng);
      break;
    case SeriesSource::shifted:
      records = scenarios::synth_shifted_rss({o.ar1, o.shift_period, o.level_jump, o.scale_jump}, rng);
      break;
    case SeriesSource::csv:
      records = scenarios::load_rss_csv(o.csv_path);
      break;
  }
  return scenarios::to_regression_pairs(records, scenarios::channel_count(records));
}

online::RciConfig rci_config(const ExperimentConfig& config, std::size_t x_dim) {
  online::RciConfig c;
  c.alpha = config.alpha;
  c.gamma = config.online.gamma;
  c.eta = config.online.eta;
  c.window = config.online.window;
  c.net = config.online.net;
  c.x_dim = x_dim;
  c.seed = derive_seed(config.seed, {0, 0, 0, Stream::online});
  return c;
}

void write_online_csv(std::ostream& out, const std::vector<online::RciRecord>& records) {
  out << kOnlineHeaderComment << '\n' << kOnlineColumns << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : records) {
    out << r.i << ',' << format_double(r.interval.empty ? nan : r.interval.lo) << ','
        << format_double(r.interval.empty ? nan : r.interval.hi) << ',' << format_double(r.y) << ',' << r.err << ','
        << format_double(r.theta) << '\n';
  }
}

nlohmann::json online_summary_json(const OnlineResult& result, std::size_t warmup) {
  nlohmann::json ratio = std::isnan(result.inefficiency_ratio) ? nlohmann::json(nullptr)
                                                               : nlohmann::json(result.inefficiency_ratio);
  return {{"rci", average_json(result.rci_average)},
          {"nqb", average_json(result.nqb_average)},
          {"inefficiency_ratio", ratio},
          {"warmup", warmup},
          {"wall_time", {{"rci", result.rci_seconds}, {"nqb", result.nqb_seconds}}}};
}

OnlineResult run_online_from_config(const ExperimentConfig& config) {
  config.validate();
  std::filesystem::path stem = config.output;
  stem.replace_extension();
  auto with = [&](const char* suffix) {
    std::filesystem::path p = stem;
    p += suffix;
    return p;
  };
  for (const char* s : {".rci.csv", ".nqb.csv", ".summary.json"}) check_writable(with(s));

  const auto series = load_series(config);
  const std::size_t x_dim = series.empty() ? 0 : series.front().x.size();
  OnlineResult result =
      run_online_experiment(series, rci_config(config, x_dim), config.online.warmup, config.record_wall_time);

  std::ostringstream rci_csv;
  write_online_csv(rci_csv, result.rci);
  std::ostringstream nqb_csv;
  write_online_csv(nqb_csv, result.nqb);
  write_file_atomic(with(".rci.csv"), rci_csv.str());
  write_file_atomic(with(".nqb.csv"), nqb_csv.str());
  write_file_atomic(with(".summary.json"), online_summary_json(result, config.online.warmup).dump(2) + "\n");
  return result;
}

}  // namespace cpw::harness
