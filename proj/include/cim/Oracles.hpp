#ifndef CIM_ORACLES_HPP
#define CIM_ORACLES_HPP

#include <cstdint>
#include <vector>

#include "cim/Graphs.hpp"

namespace cim {

// Spin configurations are plain length-N vectors of +/-1 throughout.

/// E = -(1/2) * sum_ij J_ij s_i s_j, evaluated over the edge list
/// (identical value, each unordered pair counted once).
double isingEnergy(const GraphInstance& g, const std::vector<int>& spins);

struct GroundState {
  std::vector<int> spins;
  double energy = 0.0;
};

/// Exhaustive minimum over 2^(n-1) configurations (spin 0 fixed by the
/// global flip symmetry), Gray-code incremental updates. Requires n <= 24.
GroundState bruteForceGroundState(const GraphInstance& g);

struct CirculantGroundState {
  std::vector<int> spins;
  double energy = 0.0;     // Ising energy of the sign readout
  double eigenBound = 0.0; // -(N/2) * lambda_max, lower bound on the GS
  bool boundAttained = false;
  int waveIndex = 0;       // k of the selected Fourier mode
  bool halfSiteShift = false;
};

/// Exact solver for circulant J (the Mobius ladder): picks the maximal
/// circulant eigenvalue lambda_k (smallest k on ties), reads spins from the
/// cosine eigenvector, shifting the phase by half a site when a component
/// lands on zero. Throws DimensionError for non-circulant input.
CirculantGroundState circulantGroundState(const GraphInstance& g);

struct AnnealSchedule {
  int sweeps = 2000;
  double tStart = -1.0; // <= 0 selects 2 * max_i sum_j |J_ij|
  double tEnd = -1.0;   // <= 0 selects 1e-3 * tStart
  int restarts = 20;
  void validate() const;
};

struct AnnealResult {
  std::vector<int> spins;
  double energy = 0.0;
  double tStart = 0.0;
  double tEnd = 0.0;
  int sweeps = 0;
  int restarts = 0;
};

/// Single-spin-flip Metropolis with geometric cooling; returns the best
/// configuration over all restarts (ties resolved to the lexicographically
/// smallest spin vector, so the result is independent of how chains are
/// scheduled). Chain RNGs are split from `seed` via the anneal stream.
AnnealResult metropolisAnneal(const GraphInstance& g, AnnealSchedule schedule,
                              std::uint64_t seed, int nThreads = 1);

} // namespace cim

#endif
