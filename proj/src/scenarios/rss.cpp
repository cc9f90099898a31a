#include "cpw/scenarios/rss.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cpw/error.hpp"

namespace cpw::scenarios {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw DataError(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<RssRecord> parse_rss_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  const bool with_channel = header == std::vector<std::string>{"index", "channel_id", "rss"};
  if (!with_channel && header != std::vector<std::string>{"index", "rss"}) {
    fail(source, line_no, "expected header 'index,channel_id,rss' or 'index,rss'");
  }
  const std::size_t width = with_channel ? 3 : 2;

  std::vector<RssRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != width) {
      fail(source, line_no, "expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    RssRecord r;
    if (!parse_number(fields[0], r.index)) fail(source, line_no, "index '" + fields[0] + "' is not an integer");
    if (with_channel && !fields[1].empty()) {
      std::uint32_t id = 0;
      if (!parse_number(fields[1], id)) fail(source, line_no, "channel_id '" + fields[1] + "' is not a small integer");
      r.channel_id = id;
    }
    const std::string& rss = fields[width - 1];
    if (!parse_number(rss, r.rss) || !std::isfinite(r.rss)) fail(source, line_no, "rss '" + rss + "' is not a finite number");
    if (!records.empty() && r.index <= records.back().index) {
      fail(source, line_no, "index " + std::to_string(r.index) + " does not increase");
    }
    records.push_back(r);
  }
  return records;
}

std::vector<RssRecord> load_rss_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_rss_csv(in, path.string());
}

void Ar1Config::validate() const {
  if (!(std::abs(rho) < 1.0)) throw ConfigError("AR(1) coefficient must satisfy |rho| < 1");
  if (!(sigma >= 0.0)) throw ConfigError("AR(1) noise scale must be non-negative");
  if (length < 1) throw ConfigError("series length must be at least 1");
}

std::vector<RssRecord> synth_rss(const Ar1Config& config, Rng& rng) {
  config.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<RssRecord> series(config.length);
  double y = config.initial ? *config.initial
                            : config.mean + config.sigma / std::sqrt(1.0 - config.rho * config.rho) * normal(rng);
  for (std::size_t i = 0; i < config.length; ++i) {
    if (i > 0) y = config.mean + config.rho * (y - config.mean) + config.sigma * normal(rng);
    series[i] = {static_cast<std::int64_t>(i), std::nullopt, y};
  }
  return series;
}

void ShiftedRssConfig::validate() const {
  base.validate();
  if (period < 1) throw ConfigError("regime period must be at least 1");
  if (!(scale_jump >= 0.0)) throw ConfigError("scale jump must be non-negative");
}

std::vector<RssRecord> synth_shifted_rss(const ShiftedRssConfig& config, Rng& rng) {
  config.validate();
  const Ar1Config& b = config.base;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<RssRecord> series(b.length);
  double z = b.initial ? *b.initial - b.mean : b.sigma / std::sqrt(1.0 - b.rho * b.rho) * normal(rng);
  for (std::size_t i = 0; i < b.length; ++i) {
    const bool shifted = (i / config.period) % 2 == 1;
    if (i > 0) z = b.rho * z + (shifted ? config.scale_jump : 1.0) * b.sigma * normal(rng);
    series[i] = {static_cast<std::int64_t>(i), std::nullopt, b.mean + (shifted ? config.level_jump : 0.0) + z};
  }
  return series;
}

std::size_t channel_count(const std::vector<RssRecord>& records) {
  std::size_t count = 0;
  for (const auto& r : records) {
    if (r.channel_id) count = std::max<std::size_t>(count, std::size_t{*r.channel_id} + 1);
  }
  return count;
}

std::vector<RegressionPair> to_regression_pairs(const std::vector<RssRecord>& records, std::size_t num_channels) {
  std::vector<RegressionPair> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) {
    RegressionPair p{std::vector<double>(num_channels, 0.0), r.rss};
    if (r.channel_id && num_channels > 0) {
      if (*r.channel_id >= num_channels) throw DataError("channel_id " + std::to_string(*r.channel_id) + " out of range");
      p.x[*r.channel_id] = 1.0;
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace cpw::scenarios
