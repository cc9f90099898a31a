#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cpw::diffcore {

/// Dense row-major array of doubles. The product of `shape` always equals
/// `values.size()`.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  // 2-D access; no bounds checks.
  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * shape_[1] + c]; }

  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * shape_[1], shape_[1]}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * shape_[1], shape_[1]};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  bool all_finite() const noexcept;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

std::size_t shape_volume(const std::vector<std::size_t>& shape) noexcept;

}  // namespace cpw::diffcore
