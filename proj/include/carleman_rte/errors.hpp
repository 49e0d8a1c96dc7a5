#pragma once

#include <stdexcept>
#include <string>

namespace crte {

/// Base class for every error raised by the library. `exit_code()` is the
/// process status the CLI reports for it.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Invalid parameters, malformed config files, incompatible grids.
class ConfigError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Input data outside the domain of an operation (e.g. non-positive radiance
/// before a log transform).
class DataError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// A computation produced a non-finite or physically impossible value.
class NumericalError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// An optimizer iterate left the range where exp() is representable.
class DivergenceError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

} // namespace crte
