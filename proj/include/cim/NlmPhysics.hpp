#ifndef CIM_NLM_PHYSICS_HPP
#define CIM_NLM_PHYSICS_HPP

#include <complex>

#include <Eigen/Dense>

#include "cim/Errors.hpp"

namespace cim {

using Complex = std::complex<double>;

// Everything dynamical runs in normalized units: fields in units of the
// characteristic amplitude A0, propagation coordinate z in units of the
// medium length L, and a single dimensionless gain constant
// kappaTilde = kappa * L * A0. The physical constants are carried only so
// reports can quote kappa = 2*pi*chi2 / (lambda_s * n^2).
struct NormalizedUnits {
  double kappaTilde = 1e-2;

  // physical metadata, reporting only
  double a0VoltsPerMeter = 6.77e3;
  double lengthMeters = 0.1;
  double chi2MetersPerVolt = 1e-11;
  double lambdaSignalMeters = 1064e-9;
  double refractiveIndex = 2.0;

  /// kappa in 1/V from the physical metadata.
  double physicalKappa() const;

  /// kappa * L * A0 from the metadata; should agree with kappaTilde when the
  /// metadata describes the same crystal.
  double metadataKappaTilde() const;

  void validate() const; // kappaTilde > 0
};

/// Signal/pump amplitude pair at one site, in units of A0.
struct SitePair {
  Complex signal{0.0, 0.0};
  Complex pump{0.0, 0.0};
};

/// Magnitudes and relative phase theta = phi_pump - 2*phi_signal.
struct PolarState {
  double u = 0.0;
  double uPump = 0.0;
  double theta = 0.0;
};

/// Reduce an angle to (-pi, pi].
double reduceAngle(double x);

PolarState toPolar(const SitePair& s);

/// Embed a polar state with signal phase `signalPhase` (pump phase follows
/// from theta).
SitePair toCartesian(const PolarState& p, double signalPhase = 0.0);

/// One pass through the nonlinear medium: fixed-step RK4 on
///   dA/dz = kt * B * conj(A),   dB/dz = -kt * A^2,   z in [0, 1].
/// Throws IntegrationDivergedError (with the step index) on non-finite
/// intermediates.
SitePair integratePass(const SitePair& state, const NormalizedUnits& units,
                       int steps = 100);

/// Same pass in polar form (cross-validation oracle for integratePass):
///   du/dz = kt*u*up*cos(theta),  dup/dz = -kt*u^2*cos(theta),
///   dtheta/dz = kt*sin(theta)*(u^2 - 2*up^2)/up.
/// Throws PolarSingularityError if uPump falls below 1e-12.
PolarState integratePassPolar(const PolarState& state,
                              const NormalizedUnits& units, int steps = 100);

/// Vectorized pass for the round-trip map: every site starts from the same
/// fresh pump. Work is partitioned over `nThreads`, with the per-site
/// arithmetic identical to integratePass, so results are bit-identical for
/// any thread count. Divergence is reported for the lowest failing site.
void nlmPassInPlace(Eigen::VectorXcd& signal, Complex freshPump,
                    const NormalizedUnits& units, int steps, int nThreads = 1,
                    long roundTrip = -1);

} // namespace cim

#endif
