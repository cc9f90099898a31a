#include "cpw/online/rci.hpp"

#include <cmath>
#include <utility>

#include "cpw/diffcore/ops.hpp"
#include "cpw/error.hpp"
#include "cpw/random.hpp"

namespace cpw::online {

using conformal::PredictionInterval;
using diffcore::NetworkParams;

double stretching(double theta) noexcept {
  if (theta == 0.0) return 0.0;
  const double mag = std::expm1(std::abs(theta));
  return theta > 0.0 ? mag : -mag;
}

RollingCalibrator::RollingCalibrator(double alpha, double gamma, double theta)
    : alpha_(alpha), gamma_(gamma), theta_(theta) {}

PredictionInterval RollingCalibrator::widen(double lo, double hi) const noexcept {
  const double s = stretching(theta_);
  return PredictionInterval::between(lo - s, hi + s);
}

int RollingCalibrator::observe(const PredictionInterval& interval, double y) noexcept {
  const int err = interval.contains(y) ? 0 : 1;
  theta_ += gamma_ * (static_cast<double>(err) - alpha_);
  return err;
}

void RciConfig::validate() const {
  conformal::check_alpha(alpha);
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be non-negative");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (window < 1) throw ConfigError("window length K must be at least 1");
}

RciState rci_init(const RciConfig& config) {
  config.validate();
  const auto arch = quantile_net_architecture(config.net, config.x_dim);
  RciState s;
  s.params_lo = diffcore::init_params(arch, child_seed(config.seed, 0));
  s.params_hi = diffcore::init_params(arch, child_seed(config.seed, 1));
  return s;
}

std::vector<RegressionPair> history_window(const RciState& state, const RciConfig& config) {
  std::vector<RegressionPair> window;
  window.reserve(config.window);
  const std::size_t have = std::min(state.history.size(), config.window);
  for (std::size_t k = have; k < config.window; ++k) {
    window.push_back({std::vector<double>(config.x_dim, 0.0), 0.0});
  }
  for (std::size_t k = state.history.size() - have; k < state.history.size(); ++k) {
    window.push_back(state.history[k]);
  }
  return window;
}

PredictionInterval nqb_interval(const RciState& state, const RciConfig& config, std::span<const double> x) {
  const auto window = history_window(state, config);
  return conformal::nqb_interval(quantile_net_forward(state.params_lo, window, x),
                                 quantile_net_forward(state.params_hi, window, x));
}

PredictionInterval rci_predict(const RciState& state, const RciConfig& config, std::span<const double> x) {
  const auto window = history_window(state, config);
  RollingCalibrator cal(config.alpha, config.gamma, state.theta);
  return cal.widen(quantile_net_forward(state.params_lo, window, x),
                   quantile_net_forward(state.params_hi, window, x));
}

namespace {

// Reusable gradient buffers for the in-place loop.
struct StepBuffers {
  NetworkParams grad_lo;
  NetworkParams grad_hi;
};

void step_in_place(RciState& state, const RciConfig& config, std::span<const double> x, double y,
                   StepBuffers& buf, RciRecord* record) {
  const auto window = history_window(state, config);
  QuantileNetPass lo_pass = quantile_net_pass(state.params_lo, window, x);
  QuantileNetPass hi_pass = quantile_net_pass(state.params_hi, window, x);

  RollingCalibrator cal(config.alpha, config.gamma, state.theta);
  const PredictionInterval interval = cal.widen(lo_pass.output, hi_pass.output);
  const double theta_used = state.theta;
  const int err = cal.observe(interval, y);
  state.theta = cal.theta();

  const double q_lo = config.alpha / 2.0;
  const double q_hi = 1.0 - config.alpha / 2.0;
  if (!(buf.grad_lo.architecture() == state.params_lo.architecture())) {
    buf.grad_lo = NetworkParams(state.params_lo.architecture());
    buf.grad_hi = NetworkParams(state.params_hi.architecture());
  }
  buf.grad_lo.set_zero();
  buf.grad_hi.set_zero();
  quantile_net_backward(state.params_lo, lo_pass, diffcore::pinball_grad_yhat(q_lo, y, lo_pass.output), buf.grad_lo);
  quantile_net_backward(state.params_hi, hi_pass, diffcore::pinball_grad_yhat(q_hi, y, hi_pass.output), buf.grad_hi);
  state.params_lo.add_scaled(buf.grad_lo, -config.eta);
  state.params_hi.add_scaled(buf.grad_hi, -config.eta);

  state.history.push_back({std::vector<double>(x.begin(), x.end()), y});
  while (state.history.size() > config.window) state.history.pop_front();

  if (record) *record = {state.index, interval, y, err, theta_used};
  ++state.index;
}

}  // namespace

RciState rci_update(RciState state, const RciConfig& config, std::span<const double> x, double y,
                    RciRecord* record) {
  config.validate();
  StepBuffers buf;
  step_in_place(state, config, x, y, buf, record);
  return state;
}

std::vector<RciRecord> run_rci(const std::vector<RegressionPair>& series, const RciConfig& config) {
  if (series.empty()) throw DataError("series is empty");
  RciState state = rci_init(config);
  StepBuffers buf;
  std::vector<RciRecord> records(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    step_in_place(state, config, series[i].x, series[i].y, buf, &records[i]);
  }
  return records;
}

}  // namespace cpw::online
