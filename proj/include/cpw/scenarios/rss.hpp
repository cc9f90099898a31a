#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "cpw/random.hpp"
#include "cpw/types.hpp"

namespace cpw::scenarios {

/// One received-signal-strength sample. `rss` is kept in the source's units.
struct RssRecord {
  std::int64_t index = 0;
  std::optional<std::uint32_t> channel_id;
  double rss = 0.0;

  bool operator==(const RssRecord&) const = default;
};

/// Parses `index,channel_id,rss` (or `index,rss`) CSV with a header row.
/// Throws DataError naming `source` and the 1-based line on a malformed row
/// or a non-increasing index.
std::vector<RssRecord> parse_rss_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<RssRecord> load_rss_csv(const std::filesystem::path& path);

struct Ar1Config {
  double mean = 0.0;
  double rho = 0.9;
  double sigma = 1.0;
  std::size_t length = 1000;
  /// y[0]; drawn from the stationary law when absent.
  std::optional<double> initial;

  void validate() const;
};

/// y[i] = mean + rho (y[i-1] - mean) + sigma N(0, 1), indices 0..length-1.
std::vector<RssRecord> synth_rss(const Ar1Config& config, Rng& rng);

/// AR(1) whose regime flips every `period` samples: in odd regimes the
/// level is offset by `level_jump` and the innovation scale multiplied by
/// `scale_jump`. The latent AR state carries across regime boundaries.
struct ShiftedRssConfig {
  Ar1Config base;
  std::size_t period = 500;
  double level_jump = 0.0;
  double scale_jump = 1.0;

  void validate() const;
};

std::vector<RssRecord> synth_shifted_rss(const ShiftedRssConfig& config, Rng& rng);

/// Largest channel id + 1, or 0 when no record carries one.
std::size_t channel_count(const std::vector<RssRecord>& records);

/// (x, y) pairs: x is the one-hot channel id over `num_channels` entries
/// (empty when num_channels is 0), y the rss value.
std::vector<RegressionPair> to_regression_pairs(const std::vector<RssRecord>& records, std::size_t num_channels);

}  // namespace cpw::scenarios
