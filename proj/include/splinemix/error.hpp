#pragma once

#include <stdexcept>
#include <string>

namespace splinemix {

// Exception hierarchy. Each kind maps onto a CLI exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept = 0;
};

// Invalid configuration or argument ranges.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Malformed, inconsistent or non-finite input data.
class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

// Factorization failures, non-finite intermediate values, bad kernel arguments.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace splinemix
