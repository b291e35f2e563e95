#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pathtrack {

/// Raised for non-finite or out-of-domain inputs.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a model is evaluated where its matrices are singular
/// (the dynamic bicycle model below the minimum speed).
class SingularModelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Signals that a query ran past the end of an open course.
class EndOfCourse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Invalid or inconsistent configuration (unknown key, bad value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Identification produced a model outside the admissible class, or the
/// data do not excite the unknowns.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = std::numbers::pi;

/// Minimum longitudinal speed at which the dynamic bicycle model is defined.
inline constexpr double kMinDynamicSpeed = 0.5;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

inline double kmph_to_mps(double kmph) { return kmph / 3.6; }
inline double mps_to_kmph(double mps) { return mps * 3.6; }

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " is not finite");
}

}  // namespace pathtrack
