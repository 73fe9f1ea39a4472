#pragma once

#include <stdexcept>
#include <string>

namespace condsq {

/// Base of every error raised by the library. `kind()` is the short tag used
/// in machine-readable error reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

/// Homodyne conditioning on a quadrature with (numerically) zero variance.
class DegenerateMeasurement : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate_measurement"; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical_error"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io_error"; }
};

}  // namespace condsq
