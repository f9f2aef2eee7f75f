#include "cim/Oracles.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cim/Rng.hpp"

namespace cim {

double isingEnergy(const GraphInstance& g, const std::vector<int>& spins) {
  if (static_cast<int>(spins.size()) != g.n)
    throw DimensionError("spin vector length does not match graph size");
  double e = 0.0;
  for (const auto& [i, j, w] : g.edges) e -= w * spins[i] * spins[j];
  return e;
}

GroundState bruteForceGroundState(const GraphInstance& g) {
  if (g.n > 24)
    throw ConfigError("brute force limited to n <= 24 sites");
  const int n = g.n;

  std::vector<int> spins(n, 1);
  double energy = isingEnergy(g, spins);
  GroundState best{spins, energy};

  // Gray-code walk over the 2^(n-1) configurations with spin 0 fixed:
  // each step flips one of spins 1..n-1 and updates the energy by its
  // local field.
  const std::uint64_t total = 1ULL << (n - 1);
  for (std::uint64_t c = 1; c < total; ++c) {
    const int bit = __builtin_ctzll(c);
    const int site = bit + 1;
    double field = 0.0;
    for (int j = 0; j < n; ++j) field += g.jMatrix(site, j) * spins[j];
    energy += 2.0 * spins[site] * field;
    spins[site] = -spins[site];
    if (energy < best.energy - 1e-12) best = {spins, energy};
  }
  best.energy = isingEnergy(g, best.spins);
  return best;
}

CirculantGroundState circulantGroundState(const GraphInstance& g) {
  if (!g.isCirculant())
    throw DimensionError("circulant ground state requires a circulant J");
  const int n = g.n;
  const Eigen::VectorXd c = g.circulantFirstRow();

  // Real symmetric circulant: lambda_k = sum_j c_j cos(2 pi j k / n).
  Eigen::VectorXd lambda(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += c[j] * std::cos(2.0 * M_PI * j * k / n);
    lambda[k] = s;
  }
  int kStar = 0;
  for (int k = 1; k < n; ++k)
    if (lambda[k] > lambda[kStar] + 1e-12) kStar = k;

  CirculantGroundState out;
  out.waveIndex = kStar;
  out.eigenBound = -0.5 * n * lambda[kStar];

  auto readout = [&](double offset) {
    std::vector<int> s(n);
    double minAbs = 1e300;
    for (int j = 0; j < n; ++j) {
      const double v = std::cos(2.0 * M_PI * kStar * (j + offset) / n);
      minAbs = std::min(minAbs, std::abs(v));
      s[j] = v >= 0.0 ? 1 : -1;
    }
    return std::make_pair(s, minAbs);
  };

  auto [spins, minAbs] = readout(0.0);
  if (minAbs < 1e-9) {
    std::tie(spins, minAbs) = readout(0.5);
    out.halfSiteShift = true;
  }
  out.spins = std::move(spins);
  out.energy = isingEnergy(g, out.spins);
  out.boundAttained = std::abs(out.energy - out.eigenBound) <= 1e-9;
  return out;
}

void AnnealSchedule::validate() const {
  if (sweeps < 1) throw ConfigError("anneal sweeps must be >= 1");
  if (restarts < 1) throw ConfigError("anneal restarts must be >= 1");
  if (tStart > 0.0 && tEnd > 0.0 && !(tStart > tEnd))
    throw ConfigError("anneal requires tStart > tEnd > 0");
}

namespace {

struct Chain {
  std::vector<int> spins;
  double energy = 0.0;
};

Chain annealChain(const GraphInstance& g, const AnnealSchedule& sched,
                  double tStart, double tEnd, std::uint64_t chainSeed) {
  const int n = g.n;
  Rng rng(chainSeed);

  std::vector<int> spins(n);
  for (int i = 0; i < n; ++i) spins[i] = rng.sign();
  double energy = isingEnergy(g, spins);

  Chain best{spins, energy};
  const double cooling =
      sched.sweeps > 1 ? std::pow(tEnd / tStart, 1.0 / (sched.sweeps - 1))
                       : 1.0;
  double temperature = tStart;

  for (int sweep = 0; sweep < sched.sweeps; ++sweep) {
    for (int i = 0; i < n; ++i) {
      double field = 0.0;
      for (int j = 0; j < n; ++j) field += g.jMatrix(i, j) * spins[j];
      const double dE = 2.0 * spins[i] * field;
      // one uniform per proposal, consumed unconditionally
      const double u = rng.uniformOpen01();
      if (dE <= 0.0 || u < std::exp(-dE / temperature)) {
        spins[i] = -spins[i];
        energy += dE;
        if (energy < best.energy) best = {spins, energy};
      }
    }
    temperature *= cooling;
  }

  // incremental bookkeeping must agree with a fresh evaluation
  const double check = isingEnergy(g, best.spins);
  if (std::abs(check - best.energy) >= 1e-9)
    throw NumericalError("anneal energy bookkeeping drifted");
  best.energy = check;
  return best;
}

bool lexLess(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

} // namespace

AnnealResult metropolisAnneal(const GraphInstance& g, AnnealSchedule schedule,
                              std::uint64_t seed, int nThreads) {
  schedule.validate();
  double tStart = schedule.tStart;
  if (tStart <= 0.0) {
    double maxRow = 0.0;
    for (int i = 0; i < g.n; ++i)
      maxRow = std::max(maxRow, g.jMatrix.row(i).cwiseAbs().sum());
    tStart = 2.0 * maxRow;
    if (tStart <= 0.0) tStart = 1.0; // zero-coupling graph: any schedule works
  }
  double tEnd = schedule.tEnd > 0.0 ? schedule.tEnd : 1e-3 * tStart;
  if (!(tStart > tEnd))
    throw ConfigError("anneal requires tStart > tEnd > 0");

  std::vector<Chain> chains(schedule.restarts);
  auto runRange = [&](int lo, int hi) {
    for (int c = lo; c < hi; ++c)
      chains[c] = annealChain(g, schedule, tStart, tEnd,
                              deriveSeed(deriveSeed(seed, RngStream::Anneal),
                                         static_cast<std::uint64_t>(c)));
  };

  nThreads = std::max(1, std::min(nThreads, schedule.restarts));
  if (nThreads == 1) {
    runRange(0, schedule.restarts);
  } else {
    std::vector<std::thread> pool;
    for (int t = 1; t < nThreads; ++t)
      pool.emplace_back(runRange, schedule.restarts * t / nThreads,
                        schedule.restarts * (t + 1) / nThreads);
    runRange(0, schedule.restarts / nThreads);
    for (auto& th : pool) th.join();
  }

  // Reduction: lowest energy, ties to the lexicographically smallest spins,
  // so the outcome does not depend on chain scheduling.
  const Chain* best = &chains[0];
  for (const Chain& c : chains) {
    if (c.energy < best->energy - 1e-12 ||
        (std::abs(c.energy - best->energy) <= 1e-12 &&
         lexLess(c.spins, best->spins)))
      best = &c;
  }

  AnnealResult out;
  out.spins = best->spins;
  out.energy = best->energy;
  out.tStart = tStart;
  out.tEnd = tEnd;
  out.sweeps = schedule.sweeps;
  out.restarts = schedule.restarts;
  return out;
}

} // namespace cim
