#ifndef GLVORTEX_ERRORS_HPP
#define GLVORTEX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace glv {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatch, bad sizes, inconsistent specs.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (tau <= 0, t >= T).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A requested time is not covered by a trajectory.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Initial data that does not fit the torus (ring too large, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

class NumericalBlowup : public Error {
 public:
  NumericalBlowup(std::size_t step_index, const std::string& what)
      : Error("numerical blow-up at step " + std::to_string(step_index) + ": " + what),
        step_(step_index) {}
  std::size_t step_index() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class ExtractionError : public Error {
 public:
  using Error::Error;
};

class TrackingError : public Error {
 public:
  using Error::Error;
};

/// Winding of the current too far from an integer vector for a stable floor.
class DecompositionUnstable : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace glv

#endif  // GLVORTEX_ERRORS_HPP
