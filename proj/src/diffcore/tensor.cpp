#include "cpw/diffcore/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <utility>

#include "cpw/error.hpp"

namespace cpw::diffcore {

std::size_t shape_volume(const std::vector<std::size_t>& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), values_(shape_volume(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_volume(shape_) != values_.size()) {
    throw DimensionError("tensor shape does not match value count");
  }
}

bool Tensor::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace cpw::diffcore
