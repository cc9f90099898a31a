#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "cpw/random.hpp"
#include "cpw/types.hpp"

namespace cpw::scenarios {

using Complex = std::complex<double>;
using Constellation = std::vector<Complex>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kMaxEpsilon = 0.15;
inline constexpr double kMaxDelta = 15.0 * kPi / 180.0;

/// Latent per-dataset channel context.
struct ChannelState {
  double psi = 0.0;      // [0, 2 pi)
  double epsilon = 0.0;  // [0, 0.15]
  double delta = 0.0;    // [0, 15 deg] in radians
};

/// Two rings of four: inner at phases pi/4 + k pi/2, outer (twice the
/// radius) at phases k pi/2; inner points are symbols 0..3. Unit mean energy.
Constellation apsk8_constellation();

/// Mean |point|^2.
double mean_energy(const Constellation& points);

/// Beta(5, 2) as the 5th smallest of 6 i.i.d. uniforms.
double sample_beta52(Rng& rng);

/// psi ~ U[0, 2 pi), epsilon ~ 0.15 Beta(5,2), delta ~ 15 deg Beta(5,2).
ChannelState sample_channel_state(Rng& rng);

/// diag(1+eps, 1-eps) [[cos d, -sin d], [-sin d, cos d]] applied to (I, Q).
Complex iq_imbalance(Complex symbol, double epsilon, double delta) noexcept;

/// Noise-free channel: e^{j psi} f_IQ(symbol).
Complex channel_mean(Complex symbol, const ChannelState& state) noexcept;

/// e^{j psi} f_IQ(symbol) + v with v ~ CN(0, 1/snr). snr is linear and may
/// be +inf for a noiseless channel.
Complex channel_output(const Constellation& constellation, std::size_t symbol, const ChannelState& state,
                       double snr, Rng& rng);

double db_to_linear(double db) noexcept;

/// N examples with labels uniform over the 8 symbols and features
/// (Re x, Im x), i.i.d. given `state`.
Dataset gen_demod_dataset(const ChannelState& state, double snr, std::size_t n, Rng& rng);

}  // namespace cpw::scenarios
