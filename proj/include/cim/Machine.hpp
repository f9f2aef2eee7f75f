#ifndef CIM_MACHINE_HPP
#define CIM_MACHINE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cim/Coupling.hpp"
#include "cim/Graphs.hpp"
#include "cim/NlmPhysics.hpp"

namespace cim {

/// The N intracavity OPO amplitudes at round trip tau, in units of A0.
struct FieldState {
  Eigen::VectorXcd amplitudes;
  long roundTrip = 0;
};

/// Exactly one of the two pump fields must be set.
struct PumpSpec {
  std::optional<double> b0;             // absolute, units of A0
  std::optional<double> timesThreshold; // multiple of B0_th
};

enum class RecordFields { None, Stats, Full };

struct RunConfig {
  NormalizedUnits units;
  PumpSpec pump;
  double rOut = 0.9486832980505138; // sqrt(0.9), T_out = sqrt(0.1)
  double noiseAmp = 1e-3;
  long nRoundTrips = 1000;
  std::uint64_t seed = 0;
  int stepsPerPass = 100;
  RecordFields recordFields = RecordFields::Stats;
  bool perTripNoise = false; // research flag; the physical machine is seeded
                             // by noise only at tau = 0
  void validate() const;
};

struct TrajectoryRecord {
  long tau = 0;
  double isingEnergy = 0.0;
  double meanAbsRe = 0.0;
  double meanAbsIm = 0.0;
  double maxAbs = 0.0;
  std::uint64_t spinHash = 0;
  int spinsChanged = 0; // Hamming distance to the previous record
};

struct Trajectory {
  std::vector<TrajectoryRecord> records; // nRoundTrips + 1 entries
  std::vector<int> finalSpins;
  bool converged = false; // spin hash stable over the last 10% of the budget
  double pumpB0 = 0.0;    // resolved absolute pump
  double threshold = 0.0; // B0_th for the operator actually used
  double rhoQ = 0.0;
  std::vector<Eigen::VectorXcd> snapshots; // RecordFields::Full only
};

/// White-noise start: circular complex Gaussians with per-quadrature
/// standard deviation noiseAmp/sqrt(2) (RMS magnitude = noiseAmp), drawn in
/// site order from the noise stream of `seed`.
FieldState initNoise(int n, double noiseAmp, std::uint64_t seed);

/// Spin readout sigma_i = sgn(Re A_i); the sign of zero is pinned by
/// `signOfZero` (+1 by default).
std::vector<int> readSpins(const Eigen::VectorXcd& amplitudes,
                           int signOfZero = 1);

/// FNV-1a over the spin signs.
std::uint64_t spinHash(const std::vector<int>& spins);

/// One cavity cycle: per-site pass through the medium with a fresh pump
/// B(z=0) = pumpB0 at every site, then the coupling, then the outcoupling
/// factor rOut. Bit-identical for any thread count.
FieldState roundTrip(const FieldState& state, const CouplingOperator& op,
                     const RunConfig& cfg, double pumpB0, int nThreads = 1);

/// Resolve the pump spec to absolute units (computes the threshold when the
/// pump is given as a multiple of it).
double resolvePumpB0(const PumpSpec& pump, const CouplingOperator& op,
                     const NormalizedUnits& units, double rOut);

/// Full run from noise; records every round trip including tau = 0.
Trajectory run(const GraphInstance& g, const CouplingAssembly& asm_,
               const RunConfig& cfg, int nThreads = 1);

/// Same, with an explicit operator (the Ising energy still comes from g).
Trajectory run(const GraphInstance& g, const CouplingOperator& op,
               const RunConfig& cfg, int nThreads = 1);

} // namespace cim

#endif
