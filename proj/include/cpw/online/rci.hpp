#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "cpw/conformal/sets.hpp"
#include "cpw/diffcore/network.hpp"
#include "cpw/online/quantile_net.hpp"
#include "cpw/types.hpp"

namespace cpw::online {

/// sign(theta) * (exp(|theta|) - 1).
double stretching(double theta) noexcept;

/// The calibration feedback loop on its own: widens any base interval by
/// stretching(theta) and moves theta by gamma * (err - alpha) after each
/// observation.
class RollingCalibrator {
 public:
  RollingCalibrator(double alpha, double gamma, double theta = 0.0);

  double theta() const noexcept { return theta_; }
  conformal::PredictionInterval widen(double lo, double hi) const noexcept;
  /// Returns err = 1(y outside interval) and applies the theta update.
  int observe(const conformal::PredictionInterval& interval, double y) noexcept;

 private:
  double alpha_;
  double gamma_;
  double theta_;
};

struct RciConfig {
  double alpha = 0.1;
  double gamma = 0.03;
  double eta = 0.01;
  std::size_t window = 20;  // K
  QuantileNetDescriptor net;
  std::size_t x_dim = 0;
  std::uint64_t seed = 0;

  /// gamma = 0 is accepted: it disables calibration (the NQB baseline).
  void validate() const;
};

struct RciState {
  double theta = 0.0;
  diffcore::NetworkParams params_lo;  // level alpha / 2
  diffcore::NetworkParams params_hi;  // level 1 - alpha / 2
  std::deque<RegressionPair> history;  // at most K most recent pairs
  std::size_t index = 0;               // number of completed updates
};

/// theta = 0 and freshly initialized quantile nets (lo and hi nets get
/// distinct child seeds of config.seed).
RciState rci_init(const RciConfig& config);

/// The K most recent pairs, front-padded with all-zero pairs while fewer
/// than K have been observed.
std::vector<RegressionPair> history_window(const RciState& state, const RciConfig& config);

/// [lo(x) - stretching(theta), hi(x) + stretching(theta)].
conformal::PredictionInterval rci_predict(const RciState& state, const RciConfig& config, std::span<const double> x);

/// NQB interval of the current quantile nets (no stretching).
conformal::PredictionInterval nqb_interval(const RciState& state, const RciConfig& config,
                                           std::span<const double> x);

struct RciRecord {
  std::size_t i = 0;
  conformal::PredictionInterval interval;
  double y = 0.0;
  int err = 0;
  double theta = 0.0;  // value used for this step's interval
};

/// One step of the rolling loop for an observed (x, y): issue the interval,
/// score it, update theta, take one pinball-gradient step on each net, and
/// push (x, y) into the history.
RciState rci_update(RciState state, const RciConfig& config, std::span<const double> x, double y,
                    RciRecord* record = nullptr);

/// Runs the loop over a whole series.
std::vector<RciRecord> run_rci(const std::vector<RegressionPair>& series, const RciConfig& config);

}  // namespace cpw::online
