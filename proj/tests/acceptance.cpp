// Acceptance suite: one pass/fail line per criterion, exit nonzero on any
// failure. Heavier configurations run seeds across a small worker pool;
// thread count never changes any number printed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cim/Harness.hpp"
#include "cim/Machine.hpp"
#include "cim/Oracles.hpp"
#include "cim/Rng.hpp"

using namespace cim;
namespace fs = std::filesystem;

namespace {

int gFailures = 0;

void report(int idx, const std::string& name, bool pass,
            const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << idx << " ("
            << name << "): " << detail << std::endl;
  if (!pass) ++gFailures;
}

int poolSize() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 2 : static_cast<int>(hw);
}

RunConfig mlRunConfig(long nRoundTrips) {
  RunConfig cfg;
  cfg.pump.timesThreshold = 1.2;
  cfg.rOut = std::sqrt(0.9);
  cfg.noiseAmp = 1e-3;
  cfg.stepsPerPass = 100;
  cfg.nRoundTrips = nRoundTrips;
  return cfg;
}

struct SeedEnergies {
  std::vector<double> finals;
  std::vector<bool> flatLast500;
  std::vector<bool> converged;
  std::vector<Trajectory> trajectories;
  double maxSeedSeconds = 0.0;
};

SeedEnergies runSeedBatch(const GraphInstance& g, const RunConfig& base,
                          int nSeeds, bool keepTrajectories) {
  SeedEnergies out;
  out.finals.resize(nSeeds);
  out.flatLast500.resize(nSeeds);
  out.converged.resize(nSeeds);
  if (keepTrajectories) out.trajectories.resize(nSeeds);
  std::vector<double> seconds(nSeeds, 0.0);
  const CouplingOperator op = assembleQ(g, CouplingAssembly{});

  const int pool = std::min(poolSize(), nSeeds);
  auto work = [&](int t) {
    for (int i = t; i < nSeeds; i += pool) {
      RunConfig cfg = base;
      cfg.seed = static_cast<std::uint64_t>(i + 1);
      const auto start = std::chrono::steady_clock::now();
      Trajectory traj = run(g, op, cfg, 1);
      seconds[i] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        start)
              .count();
      out.finals[i] = traj.records.back().isingEnergy;
      out.converged[i] = traj.converged;
      bool flat = true;
      if (traj.records.size() >= 500) {
        const double last = traj.records.back().isingEnergy;
        for (std::size_t r = traj.records.size() - 500;
             r < traj.records.size(); ++r)
          flat = flat && traj.records[r].isingEnergy == last;
      }
      out.flatLast500[i] = flat;
      if (keepTrajectories) out.trajectories[i] = std::move(traj);
    }
  };
  std::vector<std::thread> threads;
  for (int t = 1; t < pool; ++t) threads.emplace_back(work, t);
  work(0);
  for (auto& th : threads) th.join();
  for (double s : seconds) out.maxSeedSeconds = std::max(out.maxSeedSeconds, s);
  return out;
}

std::string fmt(double v) { return formatDouble(v); }

// ---------------------------------------------------------------- criterion 1
void criterion1() {
  const GraphInstance g = makeGraph(GraphFamily::MobiusLadder, 112, {}, 0);
  const RunConfig cfg = mlRunConfig(200);
  const SeedEnergies batch = runSeedBatch(g, cfg, 10, /*keep=*/true);

  double re0 = 0.0, im0 = 0.0, re200 = 0.0, im200 = 0.0;
  for (const Trajectory& t : batch.trajectories) {
    re0 += t.records.front().meanAbsRe;
    im0 += t.records.front().meanAbsIm;
    re200 += t.records.back().meanAbsRe;
    im200 += t.records.back().meanAbsIm;
  }
  re0 /= 10; im0 /= 10; re200 /= 10; im200 /= 10;

  const bool imOk = im200 < 0.2 * im0;
  const bool reOk = re200 > 10.0 * re0;
  const bool timeOk = batch.maxSeedSeconds < 10.0;
  report(1, "quadrature selection", imOk && reOk && timeOk,
         "mean|Im| ratio " + fmt(im200 / im0) + " (< 0.2 required), mean|Re| ratio " +
             fmt(re200 / re0) + " (> 10 required), slowest seed " +
             fmt(batch.maxSeedSeconds) + " s (< 10 s required)");
}

// ---------------------------------------------------------------- criterion 2
void criterion2() {
  const NormalizedUnits units{};
  bool ok = true;
  std::string detail;
  for (double rho : {0.9, 0.98}) {
    for (double rOut : {0.8, std::sqrt(0.9)}) {
      const ThresholdCheck tc = thresholdCheck(rho, rOut, units);
      ok = ok && tc.consistent;
      detail += "(" + fmt(rho) + "," + fmt(rOut) + ")->" +
                fmt(tc.formulaThreshold) + (tc.consistent ? " ok " : " BAD ");
    }
  }
  // reference point: ~7.284 A0 at (0.98, sqrt(0.9), kappa=1e-2)
  const double ref = -std::log(std::sqrt(0.9) * 0.98) / 0.01;
  const bool refOk = std::abs(ref - 7.284) / 7.284 < 0.01;
  ok = ok && refOk;
  report(2, "threshold formula", ok,
         detail + "reference " + fmt(ref) + " vs 7.284 (1% bar)");
}

// ---------------------------------------------------------------- criterion 3
void criterion3() {
  bool ok = true;
  std::string detail;
  for (int n : {112, 224}) {
    const GraphInstance g = makeGraph(GraphFamily::MobiusLadder, n, {}, 0);
    const double oracle = circulantGroundState(g).energy;
    const SeedEnergies batch =
        runSeedBatch(g, mlRunConfig(2000), 20, /*keep=*/false);
    // "converged" here means the traces the first clause counts: the ones
    // that reached the ground-state energy. (The machine's own converged
    // flag watches the trailing 10% = 200 trips and so cannot imply
    // 500-trip flatness at this budget.)
    int hits = 0;
    bool flatOk = true;
    for (int i = 0; i < 20; ++i) {
      if (std::abs(batch.finals[i] - oracle) <= 1e-9) {
        ++hits;
        flatOk = flatOk && batch.flatLast500[i];
      }
    }
    ok = ok && hits >= 16 && flatOk;
    detail += "N=" + std::to_string(n) + ": " + std::to_string(hits) +
              "/20 at GS " + fmt(oracle) +
              (flatOk ? ", converged traces flat; " : ", NOT flat; ");
  }
  report(3, "ML convergence to the exact ground state (>=80% bar)", ok,
         detail);
}

// ---------------------------------------------------------------- criterion 4
void criterion4() {
  struct FamilyCase {
    GraphFamily family;
    std::uint64_t graphSeed;
    double pumpMult;
    const char* name;
  };
  const std::vector<FamilyCase> cases = {
      {GraphFamily::Complete, 1, 1.33, "K"},
      {GraphFamily::ErdosRenyi, 2, 1.30, "ER"},
      {GraphFamily::BarabasiAlbert, 3, 1.30, "BA"},
  };

  int pooledWithin5 = 0, pooledTotal = 0, strictlyAbove = 0, belowRef = 0;
  std::string detail;
  for (const FamilyCase& fc : cases) {
    const GraphInstance g = makeGraph(fc.family, 112, {}, fc.graphSeed);
    const double ref = metropolisAnneal(g, {}, g.seed, poolSize()).energy;
    RunConfig cfg = mlRunConfig(2000);
    cfg.pump = {};
    cfg.pump.timesThreshold = fc.pumpMult;
    const SeedEnergies batch = runSeedBatch(g, cfg, 20, /*keep=*/false);
    int within5 = 0;
    for (double e : batch.finals) {
      if (e < ref - 1e-9) ++belowRef;
      if (e <= ref + 0.05 * std::abs(ref)) ++within5;
      if (e > ref + 1e-9) ++strictlyAbove;
    }
    pooledWithin5 += within5;
    pooledTotal += 20;
    detail += std::string(fc.name) + ": ref " + fmt(ref) + ", within5% " +
              std::to_string(within5) + "/20; ";
  }
  const bool ok = belowRef == 0 && 2 * pooledWithin5 >= pooledTotal &&
                  strictlyAbove >= 1;
  report(4, "NP families vs Metropolis-best", ok,
         detail + "below-ref " + std::to_string(belowRef) +
             " (0 required), pooled within5% " + std::to_string(pooledWithin5) +
             "/" + std::to_string(pooledTotal) + " (>=50% required), strictly above " +
             std::to_string(strictlyAbove) + " (>=1 required)");
}

// ---------------------------------------------------------------- criterion 5
void criterion5() {
  bool fftOk = true;
  Rng rng(2024);
  for (int n : {4, 17, 64, 112}) {
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXcd kernel(n), x(n);
      for (int i = 0; i < n; ++i) {
        const auto [a, b] = rng.gaussianPair();
        kernel[i] = Complex(a, b) * 0.05;
        const auto [c, d] = rng.gaussianPair();
        x[i] = Complex(c, d);
      }
      const auto op = CouplingOperator::circulant(kernel, true);
      Eigen::VectorXcd direct = Eigen::VectorXcd::Zero(n);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          direct[j] += kernel[((i - j) % n + n) % n] * x[i];
      const double rel = (op.apply(x) - direct).cwiseAbs().maxCoeff() /
                         direct.cwiseAbs().maxCoeff();
      fftOk = fftOk && rel < 1e-10;
    }
  }

  bool eigOk = true;
  for (int n = 4; n <= 20; n += 2) {
    const GraphInstance g = makeGraph(GraphFamily::MobiusLadder, n, {}, 0);
    eigOk = eigOk && std::abs(circulantGroundState(g).energy -
                              bruteForceGroundState(g).energy) <= 1e-9;
  }

  int saMatches = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const int n = 10 + static_cast<int>(seed % 7); // 10..16 sites
    const GraphInstance g = makeGraph(GraphFamily::Complete, n, {}, seed);
    const double exact = bruteForceGroundState(g).energy;
    const double sa = metropolisAnneal(g, {}, seed).energy;
    if (sa <= exact + 1e-9) ++saMatches;
  }

  const bool ok = fftOk && eigOk && saMatches >= 95;
  report(5, "oracle equivalences", ok,
         std::string("fft-vs-direct ") + (fftOk ? "<=1e-10" : "FAILED") +
             ", circulant==brute on even N<=20 " + (eigOk ? "ok" : "FAILED") +
             ", anneal==brute " + std::to_string(saMatches) +
             "/100 (>=95 required)");
}

// ---------------------------------------------------------------- criterion 6
void criterion6() {
  const NormalizedUnits units{};
  Rng rng(99);

  bool mrOk = true;
  for (int trial = 0; trial < 30; ++trial) {
    const auto [a, b] = rng.gaussianPair();
    const auto [c, d] = rng.gaussianPair();
    const SitePair in{Complex(3 * a, 3 * b), Complex(3 * c, 3 * d)};
    const SitePair out = integratePass(in, units, 100);
    const double before = std::norm(in.signal) + std::norm(in.pump);
    const double after = std::norm(out.signal) + std::norm(out.pump);
    mrOk = mrOk && std::abs(after - before) / before < 1e-9;
  }

  const SitePair depleted{Complex(1.0, 0.0), Complex(7.0, 0.0)};
  const SitePair ref = integratePass(depleted, units, 10000);
  auto err = [&](int steps) {
    const SitePair o = integratePass(depleted, units, steps);
    return std::abs(o.signal - ref.signal) + std::abs(o.pump - ref.pump);
  };
  const double order1 = std::log2(err(4) / err(8));
  const double order2 = std::log2(err(8) / err(16));
  const bool orderOk =
      order1 > 3.5 && order1 < 4.5 && order2 > 3.5 && order2 < 4.5;

  bool polarOk = true;
  for (int trial = 0; trial < 10; ++trial) {
    PolarState p;
    p.u = 1e-3 * (0.5 + rng.uniform01());
    p.uPump = 5.0 + 4.0 * rng.uniform01();
    p.theta = 2.0 * rng.uniform01() - 1.0;
    const PolarState viaPolar = integratePassPolar(p, units, 100);
    const PolarState viaCart = toPolar(integratePass(toCartesian(p), units, 100));
    polarOk = polarOk && std::abs(viaPolar.u - viaCart.u) < 1e-6 &&
              std::abs(viaPolar.uPump - viaCart.uPump) < 1e-6 &&
              std::abs(reduceAngle(viaPolar.theta - viaCart.theta)) < 1e-6;
  }

  const GraphInstance g = makeGraph(GraphFamily::MobiusLadder, 16, {}, 0);
  const CouplingOperator op = assembleQ(g, CouplingAssembly{});
  RunConfig cfg = mlRunConfig(100);
  FieldState state;
  state.amplitudes.resize(16);
  for (int i = 0; i < 16; ++i)
    state.amplitudes[i] = Complex(1e-3 * ((i % 5) - 2.0), 0.0);
  const double pump = resolvePumpB0(cfg.pump, op, units, cfg.rOut);
  bool realOk = true;
  for (int trip = 0; trip < 100; ++trip) {
    state = roundTrip(state, op, cfg, pump);
    for (int i = 0; i < 16; ++i)
      realOk = realOk && state.amplitudes[i].imag() == 0.0;
  }

  report(6, "physics invariants", mrOk && orderOk && polarOk && realOk,
         std::string("Manley-Rowe ") + (mrOk ? "<=1e-9" : "FAILED") +
             ", RK4 orders " + fmt(order1) + "/" + fmt(order2) +
             ", polar-vs-Cartesian " + (polarOk ? "<=1e-6" : "FAILED") +
             ", real closure " + (realOk ? "exact" : "BROKEN"));
}

// ---------------------------------------------------------------- criterion 7
void criterion7() {
  const fs::path base = fs::temp_directory_path() / "cim_acceptance_det";
  fs::remove_all(base);

  auto makeSpec = [&](const std::string& family, const fs::path& dir) {
    nlohmann::json graph;
    if (family == "mobius-ladder")
      graph = {{"family", family}, {"n", 16}, {"seed", 1}, {"alpha", -0.2}};
    else
      graph = {{"family", family}, {"n", 16}, {"seed", 1}, {"beta", 0.05},
               {"p", 0.3}};
    return experimentFromJson(nlohmann::json{
        {"schema_version", 1},
        {"name", "determinism-" + family},
        {"graph", graph},
        {"run",
         {{"pump", {{"times_threshold", 1.2}}},
          {"n_round_trips", 300},
          {"steps_per_pass", 50}}},
        {"seeds", {1, 2, 3}},
        {"output", {{"dir", dir.string()}}},
    });
  };

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  bool ok = true;
  for (const std::string family : {"mobius-ladder", "erdos-renyi"}) {
    const fs::path dirA = base / family / "a";
    const fs::path dirB = base / family / "b";
    runExperiment(makeSpec(family, dirA), 1);
    ExperimentSpec replay = loadExperimentSpec(dirA / "config.json");
    replay.outputDir = dirB;
    runExperiment(replay, 4);
    for (int s = 1; s <= 3; ++s) {
      const fs::path rel = fs::path("seed_" + std::to_string(s)) / "trajectory.csv";
      ok = ok && !slurp(dirA / rel).empty() &&
           slurp(dirA / rel) == slurp(dirB / rel);
    }
  }
  fs::remove_all(base);
  report(7, "determinism across emitted-config replays and thread counts", ok,
         ok ? "byte-identical CSVs (threads 1 vs 4, ML + ER)"
            : "CSV mismatch between replays");
}

} // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  if (gFailures > 0) {
    std::cout << gFailures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all acceptance criteria passed" << std::endl;
  return 0;
}
