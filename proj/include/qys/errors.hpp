#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qys {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. Carries the byte offset of the failure.
struct SyntaxError : Error {
  SyntaxError(std::string msg, std::size_t offset)
      : Error(std::move(msg)), offset(offset) {}
  std::size_t offset;
};

/// A coordinate name in an expression does not resolve in the chart.
struct BindError : Error {
  using Error::Error;
};

/// Evaluation hit ln/sqrt of a non-positive argument, division by zero, etc.
struct DomainError : Error {
  using Error::Error;
};

/// A derivative of higher degree than the configured jet order was requested.
struct OrderError : Error {
  using Error::Error;
};

/// Scenario/input validation failure (schema, sampling, construction).
struct InputError : Error {
  using Error::Error;
};

}  // namespace qys
