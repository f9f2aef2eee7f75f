#include "cim/NlmPhysics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <vector>

namespace cim {

double NormalizedUnits::physicalKappa() const {
  return 2.0 * M_PI * chi2MetersPerVolt /
         (lambdaSignalMeters * refractiveIndex * refractiveIndex);
}

double NormalizedUnits::metadataKappaTilde() const {
  return physicalKappa() * lengthMeters * a0VoltsPerMeter;
}

void NormalizedUnits::validate() const {
  if (!(kappaTilde > 0.0))
    throw ConfigError("kappaTilde must be positive");
}

double reduceAngle(double x) {
  double r = std::remainder(x, 2.0 * M_PI);
  if (r <= -M_PI) r += 2.0 * M_PI;
  return r;
}

PolarState toPolar(const SitePair& s) {
  PolarState p;
  p.u = std::abs(s.signal);
  p.uPump = std::abs(s.pump);
  p.theta = reduceAngle(std::arg(s.pump) - 2.0 * std::arg(s.signal));
  return p;
}

SitePair toCartesian(const PolarState& p, double signalPhase) {
  SitePair s;
  s.signal = std::polar(p.u, signalPhase);
  s.pump = std::polar(p.uPump, p.theta + 2.0 * signalPhase);
  return s;
}

namespace {

inline bool finite(const Complex& c) {
  return std::isfinite(c.real()) && std::isfinite(c.imag());
}

struct PairDeriv {
  Complex dSignal;
  Complex dPump;
};

inline PairDeriv deriv(const Complex& a, const Complex& b, double kt) {
  return {kt * b * std::conj(a), -kt * a * a};
}

} // namespace

SitePair integratePass(const SitePair& state, const NormalizedUnits& units,
                       int steps) {
  units.validate();
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (!finite(state.signal) || !finite(state.pump))
    throw IntegrationDivergedError(0);

  const double kt = units.kappaTilde;
  const double h = 1.0 / steps;
  Complex a = state.signal;
  Complex b = state.pump;
  for (int i = 0; i < steps; ++i) {
    const PairDeriv k1 = deriv(a, b, kt);
    const PairDeriv k2 =
        deriv(a + 0.5 * h * k1.dSignal, b + 0.5 * h * k1.dPump, kt);
    const PairDeriv k3 =
        deriv(a + 0.5 * h * k2.dSignal, b + 0.5 * h * k2.dPump, kt);
    const PairDeriv k4 = deriv(a + h * k3.dSignal, b + h * k3.dPump, kt);
    a += (h / 6.0) *
         (k1.dSignal + 2.0 * k2.dSignal + 2.0 * k3.dSignal + k4.dSignal);
    b += (h / 6.0) * (k1.dPump + 2.0 * k2.dPump + 2.0 * k3.dPump + k4.dPump);
    if (!finite(a) || !finite(b)) throw IntegrationDivergedError(i + 1);
  }
  return {a, b};
}

namespace {

struct PolarDeriv {
  double dU, dUPump, dTheta;
};

inline PolarDeriv polarDeriv(double u, double up, double th, double kt) {
  if (up < 1e-12)
    throw PolarSingularityError("pump magnitude below 1e-12 in polar form");
  const double c = std::cos(th);
  const double s = std::sin(th);
  return {kt * u * up * c, -kt * u * u * c, kt * s * (u * u - 2.0 * up * up) / up};
}

} // namespace

PolarState integratePassPolar(const PolarState& state,
                              const NormalizedUnits& units, int steps) {
  units.validate();
  if (steps < 1) throw ConfigError("steps must be >= 1");

  const double kt = units.kappaTilde;
  const double h = 1.0 / steps;
  double u = state.u, up = state.uPump, th = state.theta;
  for (int i = 0; i < steps; ++i) {
    const PolarDeriv k1 = polarDeriv(u, up, th, kt);
    const PolarDeriv k2 = polarDeriv(u + 0.5 * h * k1.dU, up + 0.5 * h * k1.dUPump,
                                     th + 0.5 * h * k1.dTheta, kt);
    const PolarDeriv k3 = polarDeriv(u + 0.5 * h * k2.dU, up + 0.5 * h * k2.dUPump,
                                     th + 0.5 * h * k2.dTheta, kt);
    const PolarDeriv k4 =
        polarDeriv(u + h * k3.dU, up + h * k3.dUPump, th + h * k3.dTheta, kt);
    u += (h / 6.0) * (k1.dU + 2.0 * k2.dU + 2.0 * k3.dU + k4.dU);
    up += (h / 6.0) * (k1.dUPump + 2.0 * k2.dUPump + 2.0 * k3.dUPump + k4.dUPump);
    th += (h / 6.0) * (k1.dTheta + 2.0 * k2.dTheta + 2.0 * k3.dTheta + k4.dTheta);
    if (!std::isfinite(u) || !std::isfinite(up) || !std::isfinite(th))
      throw IntegrationDivergedError(i + 1);
  }
  PolarState out;
  out.u = u;
  out.uPump = up;
  out.theta = reduceAngle(th);
  return out;
}

void nlmPassInPlace(Eigen::VectorXcd& signal, Complex freshPump,
                    const NormalizedUnits& units, int steps, int nThreads,
                    long roundTrip) {
  const Eigen::Index n = signal.size();
  nThreads = std::max(1, nThreads);

  // Lowest failing site across workers, -1 when clean.
  auto worker = [&](Eigen::Index lo, Eigen::Index hi, long& failSite,
                    int& failStep) {
    failSite = -1;
    for (Eigen::Index i = lo; i < hi; ++i) {
      try {
        signal[i] = integratePass({signal[i], freshPump}, units, steps).signal;
      } catch (const IntegrationDivergedError& e) {
        failSite = i;
        failStep = e.stepIndex;
        return;
      }
    }
  };

  if (nThreads == 1 || n < 2 * nThreads) {
    long failSite;
    int failStep = 0;
    worker(0, n, failSite, failStep);
    if (failSite >= 0)
      throw IntegrationDivergedError(failStep, failSite, roundTrip);
    return;
  }

  std::vector<std::thread> threads;
  std::vector<long> failSites(nThreads);
  std::vector<int> failSteps(nThreads);
  threads.reserve(nThreads - 1);
  for (int t = 1; t < nThreads; ++t) {
    const Eigen::Index lo = n * t / nThreads;
    const Eigen::Index hi = n * (t + 1) / nThreads;
    threads.emplace_back(worker, lo, hi, std::ref(failSites[t]),
                         std::ref(failSteps[t]));
  }
  worker(0, n / nThreads, failSites[0], failSteps[0]);
  for (auto& th : threads) th.join();

  for (int t = 0; t < nThreads; ++t) {
    if (failSites[t] >= 0)
      throw IntegrationDivergedError(failSteps[t], failSites[t], roundTrip);
  }
}

} // namespace cim
