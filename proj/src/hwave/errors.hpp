#pragma once

#include <stdexcept>
#include <string>

namespace hwave {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters, grids or configuration files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or failed numerical preconditions.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A transformed function no longer fits on its sampling grid.
class DomainCoverageError : public Error {
 public:
  using Error::Error;
};

// Scale index j = 0 where 1 - 4^{-j} appears in a denominator.
class SingularScaleError : public Error {
 public:
  using Error::Error;
};

// A design candidate with zero coefficients.
class DegenerateCandidateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hwave
