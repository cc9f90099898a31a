#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "cpw/harness/config.hpp"
#include "cpw/online/rci.hpp"
#include "cpw/types.hpp"

namespace cpw::harness {

struct TimeAverage {
  double coverage = 0.0;
  double inefficiency = 0.0;
  std::size_t steps = 0;
};

/// Mean of 1 - err and of the interval length over records[warmup:].
TimeAverage time_average(const std::vector<online::RciRecord>& records, std::size_t warmup);

struct OnlineResult {
  std::vector<online::RciRecord> rci;
  std::vector<online::RciRecord> nqb;  // same loop with gamma = 0
  TimeAverage rci_average;
  TimeAverage nqb_average;
  double inefficiency_ratio = 0.0;  // RCI / NQB; NaN when NQB has zero size
  double rci_seconds = 0.0;
  double nqb_seconds = 0.0;
};

/// Runs RCI and the uncorrected NQB baseline on the same series from the
/// same initial networks. Throws DataError when the series is not longer
/// than the warmup.
OnlineResult run_online_experiment(const std::vector<RegressionPair>& series, const online::RciConfig& rci,
                                   std::size_t warmup, bool record_wall_time = true);

/// Series described by the config's online settings (synthetic or CSV).
std::vector<RegressionPair> load_series(const ExperimentConfig& config);
online::RciConfig rci_config(const ExperimentConfig& config, std::size_t x_dim);

inline constexpr const char* kOnlineHeaderComment = "# cpw-online v1";
inline constexpr const char* kOnlineColumns = "i,lo,hi,y,err,theta";

/// Empty intervals are written with lo = hi = nan.
void write_online_csv(std::ostream& out, const std::vector<online::RciRecord>& records);
nlohmann::json online_summary_json(const OnlineResult& result, std::size_t warmup);

/// Loads the series, runs both branches and writes `<stem>.rci.csv`,
/// `<stem>.nqb.csv` and `<stem>.summary.json` next to config.output (the
/// extension of config.output is dropped to form the stem).
OnlineResult run_online_from_config(const ExperimentConfig& config);

}  // namespace cpw::harness
