#pragma once

#include <stdexcept>
#include <string>

namespace hamplug {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a pointwise linear system has no unique solution, e.g. a
/// 1-form that fails the contact condition at the evaluation point.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Step size underflow in the adaptive integrator.
class StepFailure : public Error {
 public:
  using Error::Error;
};

class MeasurementMismatch : public Error {
 public:
  using Error::Error;
};

class EmbeddingFailure : public Error {
 public:
  using Error::Error;
};

class InversionFailure : public Error {
 public:
  using Error::Error;
};

class NonPositiveDensity : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hamplug
