#include "cpw/scenarios/modclass.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "cpw/error.hpp"

namespace cpw::scenarios {

namespace {

Constellation psk(std::size_t m, double offset) {
  Constellation points;
  for (std::size_t k = 0; k < m; ++k) {
    points.push_back(std::polar(1.0, offset + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(m)));
  }
  return points;
}

Constellation qam16() {
  Constellation points;
  const double scale = 1.0 / std::sqrt(10.0);  // mean energy of the {+-1, +-3}^2 grid is 10
  for (int i = -3; i <= 3; i += 2) {
    for (int q = -3; q <= 3; q += 2) points.emplace_back(i * scale, q * scale);
  }
  return points;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  std::filesystem::path p = stem;
  p += suffix;
  return p;
}

}  // namespace

Constellation modulation_constellation(const std::string& name) {
  if (name == "BPSK") return psk(2, 0.0);
  if (name == "QPSK") return psk(4, kPi / 4.0);
  if (name == "8PSK") return psk(8, 0.0);
  if (name == "16QAM") return qam16();
  throw ConfigError("unknown modulation '" + name + "'");
}

void ModclassConfig::validate() const {
  if (modulations.empty()) throw ConfigError("at least one modulation is required");
  for (const auto& m : modulations) modulation_constellation(m);
  if (sequence_length < 1) throw ConfigError("sequence length must be at least 1");
  if (!(snr > 0.0)) throw ConfigError("snr must be positive");
  if (num_examples < 1) throw ConfigError("dataset size must be at least 1");
}

Dataset gen_modclass_dataset(const ModclassConfig& config, Rng& rng) {
  config.validate();
  std::vector<Constellation> constellations;
  for (const auto& m : config.modulations) constellations.push_back(modulation_constellation(m));
  const ChannelState state = sample_channel_state(rng);

  std::vector<std::size_t> labels(config.num_examples);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % constellations.size();
  std::shuffle(labels.begin(), labels.end(), rng);

  Dataset data;
  data.reserve(config.num_examples);
  for (std::size_t label : labels) {
    const Constellation& points = constellations[label];
    std::uniform_int_distribution<std::size_t> symbol(0, points.size() - 1);
    LabeledExample ex;
    ex.y = label;
    ex.x.reserve(2 * config.sequence_length);
    for (std::size_t t = 0; t < config.sequence_length; ++t) {
      const Complex x = channel_output(points, symbol(rng), state, config.snr, rng);
      ex.x.push_back(x.real());
      ex.x.push_back(x.imag());
    }
    data.push_back(std::move(ex));
  }
  return data;
}

void write_corpus(const std::filesystem::path& stem, const ModCorpus& corpus) {
  std::vector<std::size_t> labels;
  std::vector<char> raw;
  raw.reserve(corpus.examples.size() * corpus.example_len * 4);
  for (const auto& ex : corpus.examples) {
    if (ex.x.size() != corpus.example_len) throw DimensionError("example length differs from example_len");
    if (ex.y >= corpus.label_names.size()) throw DataError("label outside label_names");
    labels.push_back(ex.y);
    for (double v : ex.x) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int b = 0; b < 4; ++b) raw.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
    }
  }
  nlohmann::json sidecar = {{"num_examples", corpus.examples.size()},
                            {"example_len", corpus.example_len},
                            {"labels", labels},
                            {"label_names", corpus.label_names}};
  std::ofstream f32(with_suffix(stem, ".f32"), std::ios::binary);
  std::ofstream json(with_suffix(stem, ".json"));
  if (!f32 || !json) throw DataError("cannot write corpus at " + stem.string());
  f32.write(raw.data(), static_cast<std::streamsize>(raw.size()));
  json << sidecar.dump(2) << '\n';
  if (!f32 || !json) throw DataError("failed writing corpus at " + stem.string());
}

ModCorpus load_corpus(const std::filesystem::path& stem) {
  const auto json_path = with_suffix(stem, ".json");
  const auto f32_path = with_suffix(stem, ".f32");
  std::ifstream json_in(json_path);
  if (!json_in) throw DataError("cannot open " + json_path.string());
  ModCorpus corpus;
  std::size_t num_examples = 0;
  std::vector<std::size_t> labels;
  try {
    const auto sidecar = nlohmann::json::parse(json_in);
    num_examples = sidecar.at("num_examples").get<std::size_t>();
    corpus.example_len = sidecar.at("example_len").get<std::size_t>();
    labels = sidecar.at("labels").get<std::vector<std::size_t>>();
    corpus.label_names = sidecar.at("label_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(json_path.string() + ": " + e.what());
  }
  if (labels.size() != num_examples) throw DataError(json_path.string() + ": labels length differs from num_examples");

  std::ifstream f32_in(f32_path, std::ios::binary);
  if (!f32_in) throw DataError("cannot open " + f32_path.string());
  const std::vector<unsigned char> raw{std::istreambuf_iterator<char>(f32_in), std::istreambuf_iterator<char>()};
  if (raw.size() != num_examples * corpus.example_len * 4) {
    throw DataError(f32_path.string() + ": expected " + std::to_string(num_examples * corpus.example_len * 4) +
                    " bytes, found " + std::to_string(raw.size()));
  }
  corpus.examples.resize(num_examples);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < num_examples; ++i) {
    if (labels[i] >= corpus.label_names.size()) {
      throw DataError(json_path.string() + ": label " + std::to_string(labels[i]) + " at example " +
                      std::to_string(i) + " outside label_names");
    }
    auto& ex = corpus.examples[i];
    ex.y = labels[i];
    ex.x.resize(corpus.example_len);
    for (double& v : ex.x) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= std::uint32_t{raw[pos++]} << (8 * b);
      v = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  return corpus;
}

}  // namespace cpw::scenarios
