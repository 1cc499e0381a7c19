#pragma once

#include <stdexcept>
#include <string>

namespace bagl {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, panels, dimensions).
class DataError : public Error {
 public:
  using Error::Error;
};

/// An estimator could not produce a usable matrix (singular, ill-conditioned,
/// not positive definite). Backtests report such strategies as NA.
class EstimatorError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A guaranteed internal property was violated (e.g. a sampler state lost
/// positive definiteness). Always a bug or corrupted state.
class InvariantError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void throw_config(const std::string& what);
[[noreturn]] void throw_data(const std::string& what);

}  // namespace bagl
