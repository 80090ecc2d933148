#pragma once

#include <stdexcept>
#include <string>

namespace cplearn {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Incompatible shapes passed to a kernel (rows/cols/rank mismatch).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value outside the documented domain of an operation (bad index,
// non-finite input, feature-count mismatch).
class InputError : public Error {
 public:
  using Error::Error;
};

// A computation produced or would produce non-finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Materialization would exceed the dense-tensor entry budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized document (CSV, model file, config file).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally well-formed document whose contents are inconsistent.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Invalid combination of run/training options.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Dataset-level problems: schema mismatch, unseen category, constant column.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace cplearn
