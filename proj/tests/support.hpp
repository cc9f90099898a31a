#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "cpw/diffcore/network.hpp"
#include "cpw/random.hpp"
#include "cpw/types.hpp"

namespace cpw::test {

/// Worst relative error between an analytic gradient and central finite
/// differences of `loss` over every coordinate of `params`. The denominator
/// is floored at 1e-6 so that coordinates with a vanishing gradient are
/// compared in absolute terms.
inline double worst_fd_error(diffcore::NetworkParams params, const std::vector<double>& analytic,
                             const std::function<double(const diffcore::NetworkParams&)>& loss, double h = 1e-5) {
  std::vector<double> flat = params.flatten();
  double worst = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double keep = flat[i];
    flat[i] = keep + h;
    params.assign_flat(flat);
    const double up = loss(params);
    flat[i] = keep - h;
    params.assign_flat(flat);
    const double down = loss(params);
    flat[i] = keep;
    params.assign_flat(flat);
    const double fd = (up - down) / (2.0 * h);
    const double err = std::abs(fd - analytic[i]) / std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
    worst = std::max(worst, err);
  }
  return worst;
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline Dataset random_dataset(Rng& rng, std::size_t n, std::size_t dim, std::size_t classes) {
  std::uniform_int_distribution<std::size_t> label(0, classes - 1);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) d.push_back({random_vector(rng, dim), label(rng)});
  return d;
}

/// Random probability vector with strictly positive entries.
inline std::vector<double> random_distribution(Rng& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (double& x : p) s += (x = e(rng) + 1e-9);
  for (double& x : p) x /= s;
  return p;
}

inline double max_relative_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max({std::abs(a[i]), std::abs(b[i]), 1e-300}));
  }
  return worst;
}

}  // namespace cpw::test
