#pragma once

#include <stdexcept>
#include <string>

namespace sos {

// Root of the library's exception hierarchy. Everything thrown on purpose
// derives from Error; anything else escaping the library is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-facing configuration (bad key, out-of-range value, missing
// section). CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or unreadable input data (CSV schema, dates, non-finite values).
// CLI maps this to exit code 4.
class DataError : public Error {
 public:
  using Error::Error;
};

// Violated precondition on a library call.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Numerical failure at run time (divergence, degeneracy, failed calibration).
// CLI maps this to exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A kernel failed the integrability requirements (unit mass, zero mean,
// finite second moment and squared mass).
class AssumptionViolation : public NumericError {
 public:
  using NumericError::NumericError;
};

// All importance weights vanished at a filter step, even after bandwidth
// escalation. `step` is the 1-based observation index.
class DegenerateWeightsError : public NumericError {
 public:
  DegenerateWeightsError(const std::string& msg, long step)
      : NumericError(msg), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

// A state model produced a non-finite state or pseudo-observation.
// `particle` identifies the offending draw.
class ModelEvalError : public NumericError {
 public:
  ModelEvalError(const std::string& msg, long particle)
      : NumericError(msg), particle_(particle) {}
  long particle() const noexcept { return particle_; }

 private:
  long particle_;
};

// Price-dividend series fails to converge (spectral radius >= 1).
class DivergentPriceError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Root search for the risk-aversion parameter failed to bracket or converge.
class CalibrationError : public NumericError {
 public:
  using NumericError::NumericError;
};

// A density needed by an estimator is degenerate (zero variance direction).
class DegenerateDensityError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Too few observations or simulated draws for the requested statistic.
class InsufficientSampleError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A test statistic is undefined (zero long-run variance).
class DegenerateTestError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace sos
