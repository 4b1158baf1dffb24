#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace marchenko {

/// Bad input: wrong shapes, misplaced eigenvalues, malformed configs.
/// The CLI maps these to exit status 1.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown at run time. The CLI maps these to exit status 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : ValidationError {
  using ValidationError::ValidationError;
};

struct PlacementError : ValidationError {
  using ValidationError::ValidationError;
};

struct MergeError : ValidationError {
  using ValidationError::ValidationError;
};

struct UnsupportedMultiplicityError : ValidationError {
  using ValidationError::ValidationError;
};

struct ConfigError : ValidationError {
  ConfigError(std::string key, const std::string& what)
      : ValidationError(key + ": " + what), key(std::move(key)) {}
  std::string key;
};

struct SingularMatrixError : NumericalError {
  SingularMatrixError(const std::string& what, double estimate, double x)
      : NumericalError(what), condition(estimate), location(x) {}
  double condition;
  double location;  // NaN when the matrix is not tied to a point x
};

struct SpectralOverlapError : NumericalError {
  using NumericalError::NumericalError;
};

struct SpectralCollisionError : NumericalError {
  using NumericalError::NumericalError;
};

struct IntegrationError : NumericalError {
  IntegrationError(const std::string& what, double x)
      : NumericalError(what), location(x) {}
  double location;
};

struct AliasingError : NumericalError {
  using NumericalError::NumericalError;
};

struct TruncationError : NumericalError {
  using NumericalError::NumericalError;
};

struct ConditioningError : NumericalError {
  ConditioningError(const std::string& what, double estimate)
      : NumericalError(what), condition(estimate) {}
  double condition;
};

struct BranchPointError : NumericalError {
  using NumericalError::NumericalError;
};

struct NormalizationError : NumericalError {
  using NumericalError::NumericalError;
};

/// Argument-principle search could not isolate a zero (zero too close to a
/// box edge even after subdivision).
struct SubdivisionError : NumericalError {
  using NumericalError::NumericalError;
};

/// A Wronskian that should be nonzero vanished (real spectral singularity).
struct DivisionError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace marchenko
