#pragma once

#include <stdexcept>
#include <string>

namespace gai {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: NaN or out-of-range p-values, empty batches.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A rule broke its own contract (e.g. wealth went negative).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A root finder or series failed to converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or missing configuration. `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace gai
