#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cpw/diffcore/mlp.hpp"
#include "cpw/diffcore/ops.hpp"
#include "cpw/error.hpp"
#include "cpw/learners/predictor.hpp"
#include "cpw/learners/training.hpp"
#include "support.hpp"

using namespace cpw;
using namespace cpw::learners;
using diffcore::Activation;
using diffcore::NetworkParams;

namespace {

// Linear-softmax model whose logits are fixed by its bias.
NetworkParams constant_logits(const std::vector<double>& logits, std::size_t in = 2) {
  NetworkParams p(diffcore::mlp_architecture(in, {}, logits.size(), Activation::identity));
  for (std::size_t k = 0; k < logits.size(); ++k) p.block(0, 1)[k] = logits[k];
  return p;
}

TrainConfig small_config(std::uint64_t seed) {
  TrainConfig c;
  c.learning_rate = 0.1;
  c.iterations = 15;
  c.langevin = {20.0, 4, 6};
  c.seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("learners") {

TEST_CASE("bayesian predictor averages member softmaxes") {
  const auto a = constant_logits({0.3, -1.0, 2.0});
  const auto single = Predictor::frequentist(a).predict_distribution(std::vector<double>{0.1, 0.2});
  const auto pair = Predictor::bayesian({a, a}).predict_distribution(std::vector<double>{0.1, 0.2});
  for (std::size_t k = 0; k < 3; ++k) CHECK(pair[k] == doctest::Approx(single[k]).epsilon(1e-15));

  const double big = 800.0;  // softmax saturates to exactly (1, 0) and (0, 1)
  const auto p = Predictor::bayesian({constant_logits({big, 0.0}), constant_logits({0.0, big})});
  const auto d = p.predict_distribution(std::vector<double>{0.0, 0.0});
  CHECK(d[0] == 0.5);
  CHECK(d[1] == 0.5);
}

TEST_CASE("predictive distributions sum to one and stay within member range") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto arch = diffcore::mlp_architecture(2, {5}, 4, Activation::relu);
    std::vector<NetworkParams> members;
    for (int r = 0; r < 3; ++r) members.push_back(diffcore::init_params(arch, rng()));
    const auto ens = Predictor::bayesian(members);
    const auto x = test::random_vector(rng, 2, -3, 3);
    const auto d = ens.predict_distribution(x);
    CHECK(std::abs(std::accumulate(d.begin(), d.end(), 0.0) - 1.0) < 1e-12);
    for (std::size_t k = 0; k < 4; ++k) {
      double lo = 1.0;
      double hi = 0.0;
      for (const auto& m : members) {
        const double v = Predictor::frequentist(m).predict_distribution(x)[k];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      CHECK(d[k] >= lo - 1e-15);
      CHECK(d[k] <= hi + 1e-15);
    }
  }
}

TEST_CASE("bayesian predictor rejects empty or mixed ensembles") {
  CHECK_THROWS_AS(Predictor::bayesian({}), ConfigError);
  CHECK_THROWS_AS(Predictor::bayesian({constant_logits({0, 0}), constant_logits({0, 0, 0})}), ConfigError);
}

TEST_CASE("arity mismatch is an error") {
  const auto p = Predictor::frequentist(constant_logits({0.0, 1.0}, 3));
  CHECK_THROWS_AS(p.predict_distribution(std::vector<double>{1.0}), DimensionError);
}

TEST_CASE("hard_prediction examples") {
  const auto a = hard_prediction(std::vector<double>{0.90, 0.02, 0.05, 0.03});
  CHECK(a.label == 0);
  CHECK(a.confidence == 0.90);
  const auto b = hard_prediction(std::vector<double>{0.25, 0.25, 0.25, 0.25});
  CHECK(b.label == 0);
  CHECK(b.confidence == 0.25);
  const auto c = hard_prediction(std::vector<double>{0.30, 0.20, 0.25, 0.25});
  CHECK(c.label == 0);
  CHECK(c.confidence == 0.30);
  const auto d = hard_prediction(std::vector<double>{0.1, 0.45, 0.45});
  CHECK(d.label == 1);
}

TEST_CASE("one GD step on a zero linear-softmax model equals the closed form") {
  // Zero model: p = uniform. dL/dW[k][j] = mean_i (p_k - 1[y_i = k]) x_ij.
  const Dataset data{{{1.0, 2.0}, 0}, {{-1.0, 0.5}, 2}, {{0.5, -0.5}, 0}};
  const std::size_t classes = 3;
  const NetworkParams zero(diffcore::mlp_architecture(2, {}, classes, Activation::identity));
  TrainConfig cfg;
  cfg.learning_rate = 0.3;
  cfg.iterations = 1;
  const auto after = gradient_descent(zero, data, cfg);
  for (std::size_t k = 0; k < classes; ++k) {
    double gb = 0.0;
    double gw[2] = {0.0, 0.0};
    for (const auto& ex : data) {
      const double r = 1.0 / 3.0 - (ex.y == k ? 1.0 : 0.0);
      gb += r / 3.0;
      gw[0] += r * ex.x[0] / 3.0;
      gw[1] += r * ex.x[1] / 3.0;
    }
    CHECK(after.block(0, 1)[k] == doctest::Approx(-0.3 * gb).epsilon(1e-14));
    CHECK(after.block(0, 0)(k, 0) == doctest::Approx(-0.3 * gw[0]).epsilon(1e-14));
    CHECK(after.block(0, 0)(k, 1) == doctest::Approx(-0.3 * gw[1]).epsilon(1e-14));
  }
}

TEST_CASE("single-example training loss is non-increasing at a small rate") {
  const Dataset data{{{0.4, -0.9}, 1}};
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.iterations = 300;
  std::vector<double> trace;
  gradient_descent(diffcore::init_params(diffcore::mlp_architecture(2, {6}, 3, Activation::relu), 12), data, cfg,
                   &trace);
  REQUIRE(trace.size() == 300);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
  CHECK(trace.back() < trace.front());
}

TEST_CASE("training rejects empty data and out-of-range labels") {
  const auto arch = diffcore::mlp_architecture(2, {3}, 2, Activation::relu);
  CHECK_THROWS_AS(train_frequentist(arch, {}, small_config(1)), DataError);
  CHECK_THROWS_AS(train_frequentist(arch, {{{0.0, 0.0}, 2}}, small_config(1)), DataError);
  CHECK_THROWS_AS(train_langevin(arch, {}, small_config(1)), DataError);
  TrainConfig bad = small_config(1);
  bad.langevin.ensemble_size = 0;
  bad.langevin.burn_in = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("full-batch GD and Langevin MC are invariant to dataset order") {
  Rng rng(21);
  const auto arch = diffcore::mlp_architecture(2, {10, 30, 30}, 8, Activation::relu);
  for (int trial = 0; trial < 5; ++trial) {
    Dataset data = test::random_dataset(rng, 24, 2, 8);
    Dataset shuffled = data;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto cfg = small_config(rng());
    const auto a = train_frequentist(arch, data, cfg);
    const auto b = train_frequentist(arch, shuffled, cfg);
    CHECK(test::max_relative_diff(a.members()[0].flatten(), b.members()[0].flatten()) < 1e-9);
    const auto la = train_langevin(arch, data, cfg);
    const auto lb = train_langevin(arch, shuffled, cfg);
    REQUIRE(la.members().size() == lb.members().size());
    for (std::size_t r = 0; r < la.members().size(); ++r) {
      CHECK(test::max_relative_diff(la.members()[r].flatten(), lb.members()[r].flatten()) < 1e-9);
    }
  }
}

TEST_CASE("Langevin returns R snapshots at the reference configuration") {
  const auto arch = diffcore::mlp_architecture(2, {10, 30, 30}, 8, Activation::relu);
  Rng rng(3);
  const auto data = test::random_dataset(rng, 10, 2, 8);
  TrainConfig cfg;  // eta 0.2, T 20, R 20, R_min 100
  cfg.seed = 77;
  const auto p = train_langevin(arch, data, cfg);
  CHECK(p.kind() == Predictor::Kind::bayesian);
  CHECK(p.members().size() == 20);
  CHECK(train_langevin(arch, data, cfg) == p);
}

TEST_CASE("zero-noise Langevin equals GD with weight decay") {
  const auto arch = diffcore::mlp_architecture(2, {4}, 3, Activation::selu);
  Rng rng(9);
  const auto data = test::random_dataset(rng, 6, 2, 3);
  TrainConfig cfg = small_config(5);
  cfg.langevin.temperature = std::numeric_limits<double>::infinity();
  const auto init = diffcore::init_params(arch, 123);
  const auto chain = langevin_chain(init, data, cfg, 99);

  // Independent transcription: phi <- phi - eta (grad L + phi / N).
  NetworkParams phi = init;
  const auto batch = diffcore::make_batch(canonical_order(data));
  std::vector<NetworkParams> expected;
  const std::size_t total = cfg.langevin.burn_in + cfg.langevin.ensemble_size;
  for (std::size_t t = 0; t < total; ++t) {
    const auto lg = diffcore::loss_and_grad(phi, batch, diffcore::CrossEntropyHead{});
    NetworkParams step = lg.grad;
    step.add_scaled(phi, 1.0 / static_cast<double>(data.size()));
    phi.add_scaled(step, -cfg.learning_rate);
    if (t >= cfg.langevin.burn_in) expected.push_back(phi);
  }
  REQUIRE(chain.size() == expected.size());
  for (std::size_t r = 0; r < chain.size(); ++r) {
    CHECK(test::max_relative_diff(chain[r].flatten(), expected[r].flatten()) < 1e-12);
  }
}

TEST_CASE("Langevin noise has variance 2 eta / T") {
  LangevinNoise noise(0.2, 20.0, 2024);
  CHECK(noise.variance() == doctest::Approx(0.02).epsilon(1e-14));
  double s = 0.0;
  double ss = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = noise.draw();
    s += v;
    ss += v * v;
  }
  const double mean = s / n;
  const double var = ss / n - mean * mean;
  CHECK(std::abs(var / 0.02 - 1.0) < 0.02);
}

TEST_CASE("training is seeded and reproducible") {
  const auto arch = diffcore::mlp_architecture(2, {5}, 3, Activation::relu);
  Rng rng(1);
  const auto data = test::random_dataset(rng, 9, 2, 3);
  CHECK(serialize(train_frequentist(arch, data, small_config(4))) == serialize(train_frequentist(arch, data, small_config(4))));
  CHECK(serialize(train_langevin(arch, data, small_config(4))) == serialize(train_langevin(arch, data, small_config(4))));
  CHECK_FALSE(train_langevin(arch, data, small_config(4)) == train_langevin(arch, data, small_config(5)));
}

TEST_CASE("predictor serialization round-trip") {
  const auto arch = diffcore::mlp_architecture(2, {5}, 3, Activation::relu);
  Rng rng(2);
  const auto data = test::random_dataset(rng, 9, 2, 3);
  for (const auto& p : {train_frequentist(arch, data, small_config(1)), train_langevin(arch, data, small_config(1))}) {
    const auto bytes = serialize(p);
    CHECK(deserialize_predictor(bytes) == p);
    auto cut = bytes;
    cut.resize(cut.size() - 3);
    CHECK_THROWS_AS(deserialize_predictor(cut), Error);
  }
}

TEST_CASE("pinball GD estimates a quantile") {
  // Constant model (no hidden layer, zero inputs): the minimizer is the
  // empirical q-quantile of the targets.
  std::vector<RegressionPair> data;
  for (int i = 1; i <= 100; ++i) data.push_back({{0.0}, static_cast<double>(i)});
  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.iterations = 4000;
  const NetworkParams zero(diffcore::mlp_architecture(1, {}, 1, Activation::identity));
  const auto fit = fit_quantile_regressor(zero, data, 0.9, cfg);
  CHECK(fit.block(0, 1)[0] == doctest::Approx(90.5).epsilon(0.02));
}

}  // TEST_SUITE
