#ifndef CIM_ERRORS_HPP
#define CIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cim {

/// Bad or inconsistent configuration input. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Mismatched vector/matrix dimensions between operator and field.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Base for runtime numerical failures. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value encountered while integrating the parametric ODEs.
class IntegrationDivergedError : public NumericalError {
public:
  IntegrationDivergedError(int stepIndex, long site = -1, long roundTrip = -1)
      : NumericalError(message(stepIndex, site, roundTrip)),
        stepIndex(stepIndex), site(site), roundTrip(roundTrip) {}

  int stepIndex;
  long site;
  long roundTrip;

private:
  static std::string message(int step, long site, long tau) {
    std::string m = "integration diverged at step " + std::to_string(step);
    if (site >= 0) m += ", site " + std::to_string(site);
    if (tau >= 0) m += ", round trip " + std::to_string(tau);
    return m;
  }
};

/// Pump magnitude fell below the polar-form singularity guard (1/u_p term).
class PolarSingularityError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Operator spectral radius violates the passive-transmission bound.
class PassivityError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Round-trip linear gain exceeds unity at zero pump; no finite threshold.
class NoThresholdError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Iterative eigenvalue estimate failed to converge.
class ConvergenceError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

} // namespace cim

#endif
