#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cpw/error.hpp"
#include "cpw/scenarios/channel.hpp"
#include "cpw/scenarios/modclass.hpp"
#include "cpw/scenarios/rss.hpp"

using namespace cpw;
using namespace cpw::scenarios;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cpw_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Pearson chi-square statistic against a uniform law.
double chi_square_uniform(const std::vector<std::size_t>& counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) stat += (c - expected) * (c - expected) / expected;
  return stat;
}

}  // namespace

TEST_SUITE("scenarios") {

TEST_CASE("8-APSK constellation geometry") {
  const auto c = apsk8_constellation();
  REQUIRE(c.size() == 8);
  CHECK(mean_energy(c) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = i + 1; j < 8; ++j) CHECK(std::abs(c[i] - c[j]) > 0.1);
  }
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(std::abs(c[k + 4]) / std::abs(c[k]) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::arg(c[k]) == doctest::Approx(std::remainder(kPi / 4 + k * kPi / 2, 2 * kPi)).epsilon(1e-12));
  }
}

TEST_CASE("Beta(5,2) channel parameters") {
  Rng rng(100);
  const int n = 100000;
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_channel_state(rng);
    CHECK_MESSAGE((s.psi >= 0.0 && s.psi < 2 * kPi), "psi out of range");
    CHECK_MESSAGE((s.epsilon >= 0.0 && s.epsilon <= kMaxEpsilon), "epsilon out of range");
    CHECK_MESSAGE((s.delta >= 0.0 && s.delta <= kMaxDelta), "delta out of range");
    mean += s.epsilon / kMaxEpsilon;
  }
  CHECK(std::abs(mean / n - 5.0 / 7.0) <= 0.005);

  Rng a(7), b(7);
  const auto sa = sample_channel_state(a);
  const auto sb = sample_channel_state(b);
  CHECK(sa.psi == sb.psi);
  CHECK(sa.epsilon == sb.epsilon);
  CHECK(sa.delta == sb.delta);
}

TEST_CASE("IQ imbalance examples") {
  const Complex y(0.3, -0.8);
  CHECK(iq_imbalance(y, 0.0, 0.0) == y);
  const auto r = iq_imbalance(Complex(0.6, 0.4), 1.0, 0.0);
  CHECK(r.real() == doctest::Approx(1.2));
  CHECK(r.imag() == doctest::Approx(0.0));
  const auto q = iq_imbalance(Complex(1.0, 0.0), 0.0, kPi / 2);
  CHECK(q.real() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(q.real()) < 1e-15);
  CHECK(q.imag() == doctest::Approx(-1.0));
}

TEST_CASE("channel output: noiseless identity and noise calibration") {
  const auto c = apsk8_constellation();
  Rng rng(4);
  const ChannelState identity{};
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < 8; ++s) CHECK(channel_output(c, s, identity, inf, rng) == c[s]);

  const ChannelState state{1.1, 0.1, 0.2};
  for (double snr : {1.0, 4.0}) {
    double var = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const std::size_t s = static_cast<std::size_t>(i % 8);
      var += std::norm(channel_output(c, s, state, snr, rng) - channel_mean(c[s], state));
    }
    CHECK((var / n) * snr == doctest::Approx(1.0).epsilon(0.02));
  }

  for (std::size_t s = 0; s < 8; ++s) {
    const ChannelState rotated{2.3, 0.1, 0.2};
    const ChannelState unrotated{0.0, 0.1, 0.2};
    CHECK(std::abs(channel_mean(c[s], rotated)) == doctest::Approx(std::abs(channel_mean(c[s], unrotated))));
  }
  CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
  CHECK(db_to_linear(0.0) == 1.0);
}

TEST_CASE("demodulation dataset") {
  Rng rng(5);
  const auto state = sample_channel_state(rng);
  const auto d = gen_demod_dataset(state, db_to_linear(5.0), 10000, rng);
  std::vector<std::size_t> counts(8);
  for (const auto& ex : d) {
    CHECK_MESSAGE(ex.x.size() == 2, "feature dimension");
    ++counts.at(ex.y);
  }
  // 99.9% point of chi-square with 7 degrees of freedom.
  CHECK(chi_square_uniform(counts) < 24.32);

  Rng a(9), b(9);
  CHECK(gen_demod_dataset(state, 3.0, 50, a) == gen_demod_dataset(state, 3.0, 50, b));
}

TEST_CASE("modulation classification data") {
  for (const char* name : {"BPSK", "QPSK", "8PSK", "16QAM"}) {
    CHECK(mean_energy(modulation_constellation(name)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(modulation_constellation("64QAM"), ConfigError);

  ModclassConfig cfg;
  cfg.modulations = {"BPSK"};
  cfg.snr = std::numeric_limits<double>::infinity();
  cfg.num_examples = 3;
  Rng rng(6);
  for (const auto& ex : gen_modclass_dataset(cfg, rng)) {
    REQUIRE(ex.x.size() == 2 * cfg.sequence_length);
    std::set<std::pair<double, double>> distinct;
    for (std::size_t t = 0; t < cfg.sequence_length; ++t) distinct.insert({ex.x[2 * t], ex.x[2 * t + 1]});
    CHECK(distinct.size() == 2);
  }

  ModclassConfig full;
  full.num_examples = 402;
  const auto d = gen_modclass_dataset(full, rng);
  std::vector<std::size_t> counts(4);
  for (const auto& ex : d) ++counts.at(ex.y);
  for (auto c : counts) CHECK((c == 100 || c == 101));

  Rng a(8), b(8);
  CHECK(gen_modclass_dataset(full, a) == gen_modclass_dataset(full, b));

  ModclassConfig bad;
  bad.modulations = {"BPSK", "OOK"};
  CHECK_THROWS_AS(gen_modclass_dataset(bad, rng), ConfigError);
}

TEST_CASE("corpus round trip and failure modes") {
  const auto dir = scratch_dir("corpus");
  ModCorpus corpus;
  corpus.example_len = 4;
  corpus.label_names = {"a", "b"};
  corpus.examples = {{{0.5, -1.25, 2.0, 0.0}, 1}, {{1.0, 2.0, 3.0, 4.0}, 0}};
  write_corpus(dir / "tiny", corpus);
  const auto back = load_corpus(dir / "tiny");
  CHECK(back.examples == corpus.examples);  // values are exact in float32
  CHECK(back.label_names == corpus.label_names);
  CHECK(std::filesystem::file_size(dir / "tiny.f32") == 2 * 4 * 4);

  CHECK_THROWS_AS(load_corpus(dir / "missing"), DataError);
  std::filesystem::resize_file(dir / "tiny.f32", 20);
  CHECK_THROWS_AS(load_corpus(dir / "tiny"), DataError);
  write_corpus(dir / "tiny", corpus);
  std::ofstream(dir / "tiny.json") << "{\"num_examples\": 2, \"example_len\": 4, \"labels\": [1, 5], "
                                      "\"label_names\": [\"a\", \"b\"]}";
  CHECK_THROWS_AS(load_corpus(dir / "tiny"), DataError);
  std::ofstream(dir / "tiny.json") << "not json";
  CHECK_THROWS_AS(load_corpus(dir / "tiny"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("RSS CSV parsing") {
  std::istringstream good("index,channel_id,rss\n1,0,-61.5\n2,3,-60\n5,,-59.25\n");
  const auto r = parse_rss_csv(good);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == RssRecord{1, 0u, -61.5});
  CHECK(r[1].channel_id == 3u);
  CHECK_FALSE(r[2].channel_id.has_value());
  CHECK(channel_count(r) == 4);

  std::istringstream no_channel("index,rss\n0,-70\n1,-71\n");
  const auto n = parse_rss_csv(no_channel);
  REQUIRE(n.size() == 2);
  CHECK_FALSE(n[0].channel_id.has_value());
  CHECK(channel_count(n) == 0);
  CHECK(to_regression_pairs(n, 0)[1] == RegressionPair{{}, -71.0});
  CHECK(to_regression_pairs(r, 4)[1] == RegressionPair{{0.0, 0.0, 0.0, 1.0}, -60.0});

  std::istringstream bad_value("index,channel_id,rss\n1,0,-61.5\n2,0,loud\n");
  try {
    parse_rss_csv(bad_value, "walk.csv");
    FAIL("expected a parse error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("walk.csv:3") != std::string::npos);
  }

  std::istringstream non_monotone("index,rss\n4,-1\n4,-2\n");
  CHECK_THROWS_AS(parse_rss_csv(non_monotone), DataError);
  std::istringstream wrong_fields("index,rss\n1,2,3\n");
  CHECK_THROWS_AS(parse_rss_csv(wrong_fields), DataError);
  std::istringstream wrong_header("time,value\n1,2\n");
  CHECK_THROWS_AS(parse_rss_csv(wrong_header), DataError);
  CHECK_THROWS_AS(load_rss_csv("/nonexistent/rss.csv"), DataError);
}

TEST_CASE("AR(1) synthesis") {
  Rng rng(10);
  Ar1Config flat{2.0, 0.5, 0.0, 12, 8.0};
  const auto d = synth_rss(flat, rng);
  REQUIRE(d.size() == 12);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d[i].rss == doctest::Approx(2.0 + 6.0 * std::pow(0.5, double(i))).epsilon(1e-14));
    CHECK(d[i].index == static_cast<std::int64_t>(i));
  }

  Ar1Config big{0.0, 0.8, 1.5, 100000, std::nullopt};
  const auto s = synth_rss(big, rng);
  double m = 0.0, v = 0.0;
  for (const auto& x : s) m += x.rss;
  m /= s.size();
  for (const auto& x : s) v += (x.rss - m) * (x.rss - m);
  v /= s.size();
  CHECK(v == doctest::Approx(1.5 * 1.5 / (1 - 0.64)).epsilon(0.03));

  Rng a(3), b(3);
  CHECK(synth_rss(big, a) == synth_rss(big, b));
  CHECK_THROWS_AS(synth_rss({0.0, 1.0, 1.0, 10, std::nullopt}, rng), ConfigError);
  CHECK_THROWS_AS(synth_rss({0.0, -1.2, 1.0, 10, std::nullopt}, rng), ConfigError);
}

TEST_CASE("regime-switching series shifts level in odd regimes") {
  Rng rng(11);
  ShiftedRssConfig cfg{{0.0, 0.5, 0.0, 40, 0.0}, 10, 3.0, 2.0};
  const auto s = synth_shifted_rss(cfg, rng);
  REQUIRE(s.size() == 40);
  // Noiseless from zero: the series is exactly the level offset.
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i].rss == ((i / 10) % 2 ? 3.0 : 0.0));
}

}  // TEST_SUITE
