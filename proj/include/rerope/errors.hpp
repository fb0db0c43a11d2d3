#pragma once

#include <stdexcept>
#include <string>

namespace rerope {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction parameters (odd band widths, theta <= 1, bad plane ranges, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Vector/operator size mismatch.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be invertible is singular (or numerically so).
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a documented contract (non-unit quaternion, length mismatch, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line) : Error(what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Timestamps out of order (non-increasing).
class OrderingError : public Error {
 public:
  using Error::Error;
};

/// Point set too degenerate for the requested estimation (coincident/collinear).
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Numeric parameter below the precision floor (e.g. finite-difference step too small).
class PrecisionError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure; carries the offending path in the message.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rerope
