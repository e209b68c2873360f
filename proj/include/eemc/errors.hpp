#pragma once

#include <stdexcept>
#include <string>

namespace eemc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class EmptyReservoir : public Error {
 public:
  EmptyReservoir() : Error("draw requested from an empty reservoir") {}
};

class NonFiniteWeight : public Error {
 public:
  using Error::Error;
};

class MissingExactSampler : public Error {
 public:
  using Error::Error;
};

class KappaTooLarge : public Error {
 public:
  using Error::Error;
};

/// Raised when a chain is reducible (the stationary or Poisson system is singular).
class SingularSystem : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace eemc
