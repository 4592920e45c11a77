#pragma once

#include <stdexcept>
#include <string>

namespace sparsets {

// Root of every error the library throws. Subclasses identify the failing
// stage so the CLI can map them onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StationarityError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class RankError : public NumericError {
 public:
  using NumericError::NumericError;
};

class NuisanceError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparsets
