#include "cim/Machine.hpp"

#include <algorithm>
#include <cmath>

#include "cim/Oracles.hpp"
#include "cim/Rng.hpp"

namespace cim {

void RunConfig::validate() const {
  units.validate();
  if (!(rOut > 0.0) || rOut > 1.0)
    throw ConfigError("rOut must lie in (0, 1]");
  if (!(noiseAmp > 0.0)) throw ConfigError("noiseAmp must be positive");
  if (nRoundTrips < 0) throw ConfigError("nRoundTrips must be >= 0");
  if (stepsPerPass < 1) throw ConfigError("stepsPerPass must be >= 1");
  const bool hasB0 = pump.b0.has_value();
  const bool hasMult = pump.timesThreshold.has_value();
  if (hasB0 == hasMult)
    throw ConfigError(
        "pump must be given exactly one way: absolute b0 or timesThreshold");
}

FieldState initNoise(int n, double noiseAmp, std::uint64_t seed) {
  if (n < 1) throw ConfigError("need at least one site");
  if (!(noiseAmp > 0.0)) throw ConfigError("noiseAmp must be positive");
  Rng rng(deriveSeed(seed, RngStream::Noise));
  const double quad = noiseAmp / std::sqrt(2.0);
  FieldState state;
  state.amplitudes.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto [x, y] = rng.gaussianPair();
    state.amplitudes[i] = Complex(quad * x, quad * y);
  }
  state.roundTrip = 0;
  return state;
}

std::vector<int> readSpins(const Eigen::VectorXcd& amplitudes, int signOfZero) {
  std::vector<int> spins(amplitudes.size());
  for (Eigen::Index i = 0; i < amplitudes.size(); ++i) {
    const double re = amplitudes[i].real();
    spins[i] = re > 0.0 ? 1 : (re < 0.0 ? -1 : signOfZero);
  }
  return spins;
}

std::uint64_t spinHash(const std::vector<int>& spins) {
  std::uint64_t h = 1469598103934665603ULL;
  for (int s : spins) {
    h ^= static_cast<std::uint64_t>(s > 0 ? 1 : 0);
    h *= 1099511628211ULL;
  }
  return h;
}

double resolvePumpB0(const PumpSpec& pump, const CouplingOperator& op,
                     const NormalizedUnits& units, double rOut) {
  if (pump.b0.has_value() == pump.timesThreshold.has_value())
    throw ConfigError(
        "pump must be given exactly one way: absolute b0 or timesThreshold");
  if (pump.b0) return *pump.b0;
  return *pump.timesThreshold * thresholdPump(op, rOut, units);
}

FieldState roundTrip(const FieldState& state, const CouplingOperator& op,
                     const RunConfig& cfg, double pumpB0, int nThreads) {
  if (state.amplitudes.size() != op.nSites())
    throw DimensionError("field size does not match coupling operator");
  FieldState next;
  next.amplitudes = state.amplitudes;
  try {
    nlmPassInPlace(next.amplitudes, Complex(pumpB0, 0.0), cfg.units,
                   cfg.stepsPerPass, nThreads, state.roundTrip);
  } catch (const IntegrationDivergedError& e) {
    throw IntegrationDivergedError(e.stepIndex, e.site, state.roundTrip);
  }
  next.amplitudes = op.apply(next.amplitudes);
  next.amplitudes *= cfg.rOut;
  next.roundTrip = state.roundTrip + 1;
  return next;
}

namespace {

TrajectoryRecord makeRecord(long tau, const Eigen::VectorXcd& a,
                            const GraphInstance& g,
                            const std::vector<int>& spins,
                            const std::vector<int>& prevSpins) {
  TrajectoryRecord r;
  r.tau = tau;
  r.isingEnergy = isingEnergy(g, spins);
  double sumRe = 0.0, sumIm = 0.0, maxAbs = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    sumRe += std::abs(a[i].real());
    sumIm += std::abs(a[i].imag());
    maxAbs = std::max(maxAbs, std::abs(a[i]));
  }
  r.meanAbsRe = sumRe / static_cast<double>(a.size());
  r.meanAbsIm = sumIm / static_cast<double>(a.size());
  r.maxAbs = maxAbs;
  r.spinHash = spinHash(spins);
  int changed = 0;
  if (!prevSpins.empty())
    for (std::size_t i = 0; i < spins.size(); ++i)
      changed += spins[i] != prevSpins[i];
  r.spinsChanged = changed;
  return r;
}

} // namespace

Trajectory run(const GraphInstance& g, const CouplingOperator& op,
               const RunConfig& cfg, int nThreads) {
  cfg.validate();
  if (op.nSites() != g.n)
    throw DimensionError("coupling operator size does not match graph");

  Trajectory traj;
  traj.rhoQ = op.rho();
  // The threshold is reported even when the pump is absolute; it only fails
  // to exist above unity zero-pump gain, which passivity already excludes.
  traj.threshold = thresholdPump(op, cfg.rOut, cfg.units);
  traj.pumpB0 = resolvePumpB0(cfg.pump, op, cfg.units, cfg.rOut);

  FieldState state = initNoise(g.n, cfg.noiseAmp, cfg.seed);
  Rng tripNoise(deriveSeed(deriveSeed(cfg.seed, RngStream::Noise), 0x7261));
  const double quad = cfg.noiseAmp / std::sqrt(2.0);

  std::vector<int> prevSpins;
  traj.records.reserve(cfg.nRoundTrips + 1);
  for (long tau = 0; tau <= cfg.nRoundTrips; ++tau) {
    std::vector<int> spins = readSpins(state.amplitudes);
    traj.records.push_back(
        makeRecord(tau, state.amplitudes, g, spins, prevSpins));
    if (cfg.recordFields == RecordFields::Full)
      traj.snapshots.push_back(state.amplitudes);
    prevSpins = std::move(spins);
    if (tau == cfg.nRoundTrips) break;

    state = roundTrip(state, op, cfg, traj.pumpB0, nThreads);
    if (cfg.perTripNoise) {
      for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
        const auto [x, y] = tripNoise.gaussianPair();
        state.amplitudes[i] += Complex(quad * x, quad * y);
      }
    }
  }
  traj.finalSpins = std::move(prevSpins);

  // Converged when the spin hash is frozen over the trailing 10% of records.
  const std::size_t tail =
      std::max<std::size_t>(1, traj.records.size() / 10);
  traj.converged = true;
  const std::uint64_t lastHash = traj.records.back().spinHash;
  for (std::size_t i = traj.records.size() - tail; i < traj.records.size();
       ++i)
    if (traj.records[i].spinHash != lastHash) traj.converged = false;
  return traj;
}

Trajectory run(const GraphInstance& g, const CouplingAssembly& asm_,
               const RunConfig& cfg, int nThreads) {
  return run(g, assembleQ(g, asm_), cfg, nThreads);
}

} // namespace cim
