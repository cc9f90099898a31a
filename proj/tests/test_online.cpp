#include <doctest.h>

#include <cmath>
#include <random>

#include "cpw/error.hpp"
#include "cpw/online/quantile_net.hpp"
#include "cpw/online/rci.hpp"
#include "support.hpp"

using namespace cpw;
using namespace cpw::online;
using diffcore::NetworkParams;

namespace {

RciConfig small_config(std::uint64_t seed = 5) {
  RciConfig c;
  c.net.pre_hidden = {4};
  c.net.lstm_hidden = 4;
  c.net.lstm_layers = 1;
  c.net.post_hidden = {4};
  c.window = 5;
  c.x_dim = 1;
  c.seed = seed;
  return c;
}

// Zero network whose output is the constant `value`.
NetworkParams constant_net(const RciConfig& c, double value) {
  NetworkParams p(quantile_net_architecture(c.net, c.x_dim));
  const auto lay = QuantileNetLayout::of(p);
  p.block(lay.post_end - 1, 1)[0] = value;
  return p;
}

std::vector<RegressionPair> gaussian_series(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<RegressionPair> s(n);
  for (auto& p : s) p = {{g(rng)}, g(rng)};
  return s;
}

double error_rate(const std::vector<RciRecord>& r) {
  double e = 0.0;
  for (const auto& rec : r) e += rec.err;
  return e / static_cast<double>(r.size());
}

}  // namespace

TEST_SUITE("online") {

TEST_CASE("stretching examples") {
  CHECK(stretching(0.0) == 0.0);
  CHECK(stretching(1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-15));
  CHECK(stretching(1.0) == doctest::Approx(1.71828).epsilon(1e-5));
  Rng rng(1);
  for (double t : test::random_vector(rng, 200, -20.0, 20.0)) {
    CHECK(stretching(-t) == -stretching(t));
    CHECK(stretching(t + 0.1) > stretching(t));
  }
}

TEST_CASE("theta update examples") {
  RollingCalibrator miss(0.1, 0.03, 0.5);
  CHECK(miss.observe(conformal::PredictionInterval::between(0.0, 1.0), 5.0) == 1);
  CHECK(miss.theta() == doctest::Approx(0.527).epsilon(1e-14));
  RollingCalibrator hit(0.1, 0.03, 0.5);
  CHECK(hit.observe(conformal::PredictionInterval::between(0.0, 1.0), 0.5) == 0);
  CHECK(hit.theta() == doctest::Approx(0.497).epsilon(1e-14));
}

TEST_CASE("rci_predict examples") {
  const auto c = small_config();
  RciState s;
  s.params_lo = constant_net(c, -1.0);
  s.params_hi = constant_net(c, 1.0);
  const std::vector<double> x{0.3};

  s.theta = 0.0;
  CHECK(rci_predict(s, c, x) == nqb_interval(s, c, x));
  CHECK(rci_predict(s, c, x) == conformal::PredictionInterval::between(-1.0, 1.0));

  s.theta = 1.0;
  const auto iv = rci_predict(s, c, x);
  const double e1 = std::exp(1.0) - 1.0;
  CHECK(iv.lo == doctest::Approx(-1.0 - e1).epsilon(1e-15));
  CHECK(iv.hi == doctest::Approx(1.0 + e1).epsilon(1e-15));

  double last = -1.0;
  for (double t = -0.5; t < 6.0; t += 0.25) {
    s.theta = t;
    const double w = rci_predict(s, c, x).size();
    CHECK(w >= last);
    last = w;
  }
  // Bounds cross for a negative enough theta.
  s.theta = -2.0;
  CHECK(rci_predict(s, c, x).empty);
  CHECK(rci_predict(s, c, x).size() == 0.0);
}

TEST_CASE("rci_predict at theta 0 equals NQB on freshly initialized nets") {
  auto c = small_config(11);
  auto s = rci_init(c);
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    const auto x = test::random_vector(rng, 1);
    CHECK(rci_predict(s, c, x) == nqb_interval(s, c, x));
    s = rci_update(std::move(s), c, x, test::random_vector(rng, 1)[0]);
    s.theta = 0.0;
  }
}

TEST_CASE("kink convention: y on the estimate moves the output bias by eta q") {
  // The residual-side slope is used at y == yhat, so d pinball / d yhat = -q
  // and the update is not a no-op. With zero weights only the output bias
  // has a nonzero gradient.
  const auto c = small_config();
  RciState s;
  s.params_lo = constant_net(c, 0.0);
  s.params_hi = constant_net(c, 0.0);
  const auto next = rci_update(s, c, std::vector<double>{0.7}, 0.0);
  auto expect_lo = s.params_lo;
  auto expect_hi = s.params_hi;
  const auto lay = QuantileNetLayout::of(expect_lo);
  expect_lo.block(lay.post_end - 1, 1)[0] += c.eta * c.alpha / 2.0;
  expect_hi.block(lay.post_end - 1, 1)[0] += c.eta * (1.0 - c.alpha / 2.0);
  CHECK(next.params_lo == expect_lo);
  CHECK(next.params_hi == expect_hi);
}

TEST_CASE("quantile net: zero params, determinism and slot isolation") {
  const auto c = small_config();
  const auto arch = quantile_net_architecture(c.net, c.x_dim);
  Rng rng(3);
  std::vector<RegressionPair> window(c.window);
  for (auto& p : window) p = {test::random_vector(rng, 1), test::random_vector(rng, 1)[0]};
  const std::vector<double> x{0.2};

  CHECK(quantile_net_forward(NetworkParams(arch), window, x) == 0.0);

  const auto params = diffcore::init_params(arch, 9);
  CHECK(quantile_net_forward(params, window, x) == quantile_net_forward(params, window, x));

  const auto base = quantile_net_pass(params, window, x);
  for (std::size_t k = 0; k < c.window; ++k) {
    auto perturbed = window;
    perturbed[k].y += 0.5;
    perturbed[k].x[0] -= 0.25;
    const auto pass = quantile_net_pass(params, perturbed, x);
    for (std::size_t j = 0; j < c.window; ++j) {
      if (j == k) {
        CHECK(pass.w[j] != base.w[j]);
      } else {
        CHECK(pass.w[j] == base.w[j]);
      }
    }
  }
  CHECK_THROWS_AS(quantile_net_forward(params, window, std::vector<double>{1.0, 2.0}), DimensionError);
  CHECK_THROWS_AS(quantile_net_forward(params, {}, x), DimensionError);
}

TEST_CASE("history window is front-padded and bounded by K") {
  const auto c = small_config();
  auto s = rci_init(c);
  auto w = history_window(s, c);
  REQUIRE(w.size() == c.window);
  for (const auto& p : w) CHECK(p == RegressionPair{{0.0}, 0.0});

  for (int i = 1; i <= 3; ++i) s = rci_update(std::move(s), c, std::vector<double>{double(i)}, 10.0 * i);
  w = history_window(s, c);
  CHECK(w[0] == RegressionPair{{0.0}, 0.0});
  CHECK(w[1] == RegressionPair{{0.0}, 0.0});
  CHECK(w[2] == RegressionPair{{1.0}, 10.0});
  CHECK(w[4] == RegressionPair{{3.0}, 30.0});

  for (int i = 4; i <= 9; ++i) s = rci_update(std::move(s), c, std::vector<double>{double(i)}, 10.0 * i);
  CHECK(s.history.size() == c.window);
  w = history_window(s, c);
  CHECK(w.front() == RegressionPair{{5.0}, 50.0});
  CHECK(w.back() == RegressionPair{{9.0}, 90.0});
  CHECK(s.index == 9);
}

TEST_CASE("theta moves by exactly gamma (err - alpha) at every step") {
  const auto c = small_config(21);
  const auto rec = run_rci(gaussian_series(400, 4), c);
  for (std::size_t i = 0; i + 1 < rec.size(); ++i) {
    const double step = rec[i + 1].theta - rec[i].theta;
    CHECK(step == doctest::Approx(c.gamma * (rec[i].err - c.alpha)).epsilon(1e-9));
    CHECK(rec[i].err == (rec[i].interval.contains(rec[i].y) ? 0 : 1));
  }
  CHECK(rec.front().theta == 0.0);
}

TEST_CASE("adversarial jumps: long-run error rate returns to alpha") {
  // Alternating huge jumps defeat any slowly trained regressor; only the
  // stretching of theta can restore coverage.
  const auto c = small_config(8);
  std::vector<RegressionPair> series(20000);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = (i / 7) % 2 == 0 ? 1000.0 : -1000.0;
    series[i] = {{0.0}, y};
  }
  const auto rec = run_rci(series, c);
  CHECK(std::abs(error_rate(rec) - c.alpha) <= 0.02);
  double max_theta = 0.0;
  for (const auto& r : rec) max_theta = std::max(max_theta, r.theta);
  CHECK(max_theta > 5.0);  // stretching must reach the scale of the jumps
}

TEST_CASE("frozen perfect quantiles on Gaussian data keep theta near zero") {
  const double z = 1.6448536269514722;  // standard normal 0.95 quantile
  RollingCalibrator cal(0.1, 0.03);
  Rng rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  double errors = 0.0;
  double mean_abs_theta = 0.0;
  const int steps = 20000;
  for (int i = 0; i < steps; ++i) {
    errors += cal.observe(cal.widen(-z, z), g(rng));
    mean_abs_theta += std::abs(cal.theta());
  }
  CHECK(errors / steps == doctest::Approx(0.1).epsilon(0.1));
  CHECK(mean_abs_theta / steps < 0.3);
}

TEST_CASE("gamma 0 freezes theta and reproduces the NQB intervals") {
  auto c = small_config(6);
  c.gamma = 0.0;
  const auto series = gaussian_series(200, 7);
  const auto rec = run_rci(series, c);
  auto s = rci_init(c);
  for (std::size_t i = 0; i < series.size(); ++i) {
    CHECK(rec[i].theta == 0.0);
    CHECK(rec[i].interval == nqb_interval(s, c, series[i].x));
    s = rci_update(std::move(s), c, series[i].x, series[i].y);
  }
}

TEST_CASE("run_rci is deterministic and matches stepwise updates") {
  const auto c = small_config(13);
  const auto series = gaussian_series(150, 9);
  const auto a = run_rci(series, c);
  const auto b = run_rci(series, c);
  auto s = rci_init(c);
  for (std::size_t i = 0; i < series.size(); ++i) {
    RciRecord r;
    s = rci_update(std::move(s), c, series[i].x, series[i].y, &r);
    CHECK(a[i].interval == b[i].interval);
    CHECK(a[i].theta == b[i].theta);
    CHECK(r.interval == a[i].interval);
    CHECK(r.theta == a[i].theta);
    CHECK(r.i == i);
  }
  CHECK_THROWS_AS(run_rci({}, c), DataError);
}

TEST_CASE("config validation") {
  auto c = small_config();
  c.eta = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.window = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.gamma = -0.1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.alpha = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

}  // TEST_SUITE
