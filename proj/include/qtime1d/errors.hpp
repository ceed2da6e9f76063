#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qtime1d {

/// Argument outside the mathematical domain of an operation (p <= 0, t <= 0, ...).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed potential or pole-set document.
class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& what, std::ptrdiff_t index = -1)
      : std::runtime_error(what), index_(index) {}

  /// Offending segment/pole index, or -1 when the error is not tied to one.
  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  std::ptrdiff_t index_;
};

/// A grid, search window or quadrature could not resolve the requested quantity.
class resolution_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent solver configuration (time step, grid extent, ...).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A series was asked to work outside its convergence range.
class range_error : public std::range_error {
 public:
  using std::range_error::range_error;
};

}  // namespace qtime1d
