#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cpw {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or arity mismatch. `layer()` is the offending layer index when one
/// is known, otherwise npos.
class DimensionError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit DimensionError(const std::string& what, std::size_t layer = npos)
      : Error(layer == npos ? what : "layer " + std::to_string(layer) + ": " + what),
        layer_(layer) {}

  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

/// A forward or backward pass produced NaN/Inf.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t layer)
      : Error("layer " + std::to_string(layer) + ": " + what), layer_(layer) {}

  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

/// Invalid argument or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unusable input data (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace cpw
