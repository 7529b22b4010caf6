#pragma once

#include <stdexcept>
#include <string>

namespace irmkit {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or file format.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Optimization produced a non-finite value (usually a learning rate that is too large).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace irmkit
