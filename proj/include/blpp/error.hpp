#pragma once

#include <stdexcept>
#include <string>

namespace blpp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, config key, or parameter combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its documented domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A requested point or window is not covered by the environment grid.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Brute-force oracle asked to enumerate more lists than its guard allows.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

/// The initial condition is unrewarded (minus infinity) on the whole window.
class NoRewardError : public Error {
 public:
  using Error::Error;
};

}  // namespace blpp
