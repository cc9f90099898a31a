#include "cpw/scenarios/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "cpw/error.hpp"

namespace cpw::scenarios {

Constellation apsk8_constellation() {
  // Mean energy before scaling: (4 * 1 + 4 * 4) / 8 = 2.5.
  const double scale = 1.0 / std::sqrt(2.5);
  Constellation points;
  points.reserve(8);
  for (int k = 0; k < 4; ++k) points.push_back(std::polar(scale, kPi / 4.0 + k * kPi / 2.0));
  for (int k = 0; k < 4; ++k) points.push_back(std::polar(2.0 * scale, k * kPi / 2.0));
  return points;
}

double mean_energy(const Constellation& points) {
  if (points.empty()) return 0.0;
  double sum = 0.0;
  for (const Complex& p : points) sum += std::norm(p);
  return sum / static_cast<double>(points.size());
}

double sample_beta52(Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::array<double, 6> u{};
  for (double& v : u) v = uniform(rng);
  std::nth_element(u.begin(), u.begin() + 4, u.end());
  return u[4];
}

ChannelState sample_channel_state(Rng& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  ChannelState s;
  s.psi = phase(rng);
  s.epsilon = kMaxEpsilon * sample_beta52(rng);
  s.delta = kMaxDelta * sample_beta52(rng);
  return s;
}

Complex iq_imbalance(Complex symbol, double epsilon, double delta) noexcept {
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  const double i = c * symbol.real() - s * symbol.imag();
  const double q = -s * symbol.real() + c * symbol.imag();
  return {(1.0 + epsilon) * i, (1.0 - epsilon) * q};
}

Complex channel_mean(Complex symbol, const ChannelState& state) noexcept {
  return std::polar(1.0, state.psi) * iq_imbalance(symbol, state.epsilon, state.delta);
}

Complex channel_output(const Constellation& constellation, std::size_t symbol, const ChannelState& state,
                       double snr, Rng& rng) {
  if (symbol >= constellation.size()) throw DimensionError("symbol index outside the constellation");
  if (!(snr > 0.0)) throw ConfigError("snr must be positive");
  const Complex mean = channel_mean(constellation[symbol], state);
  if (std::isinf(snr)) return mean;
  std::normal_distribution<double> noise(0.0, std::sqrt(1.0 / (2.0 * snr)));
  const double re = noise(rng);
  const double im = noise(rng);
  return mean + Complex(re, im);
}

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }

Dataset gen_demod_dataset(const ChannelState& state, double snr, std::size_t n, Rng& rng) {
  if (n < 1) throw ConfigError("dataset size must be at least 1");
  const Constellation points = apsk8_constellation();
  std::uniform_int_distribution<std::size_t> label(0, points.size() - 1);
  Dataset data;
  data.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = label(rng);
    const Complex x = channel_output(points, y, state, snr, rng);
    data.push_back({{x.real(), x.imag()}, y});
  }
  return data;
}

}  // namespace cpw::scenarios
