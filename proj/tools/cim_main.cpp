// cim: coherent Ising machine simulator CLI.
//
// Subcommands: generate-graph, run, sweep, anneal, exact, report.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cim/Harness.hpp"

namespace {

using nlohmann::json;

int cmdGenerateGraph(const std::string& familyStr, int n, std::uint64_t seed,
                     double alpha, double beta, double gamma, double p, int m,
                     const std::string& outFile) {
  cim::GraphParams params;
  params.alpha = alpha;
  params.beta = beta;
  params.gamma = gamma;
  params.edgeProbability = p;
  params.attachCount = m;
  const cim::GraphInstance g =
      cim::makeGraph(cim::familyFromName(familyStr), n, params, seed);
  cim::saveGraph(g, outFile);
  std::cout << "wrote " << outFile << " (" << g.edges.size()
            << " edges, density " << cim::formatDouble(g.achievedDensity)
            << ")\n";
  return 0;
}

int cmdRun(const std::string& configFile, const std::string& presetOverride,
           const std::string& outOverride,
           const std::vector<std::uint64_t>& seedOverride, int threads) {
  cim::ExperimentSpec spec = cim::loadExperimentSpec(configFile);
  if (!presetOverride.empty())
    spec.preset = cim::presetFromName(presetOverride);
  if (!outOverride.empty()) spec.outputDir = outOverride;
  if (!seedOverride.empty()) spec.seeds = seedOverride;

  if (spec.preset == cim::Preset::PumpSweep) {
    const auto rows = cim::pumpSweep(spec, spec.pumpGrid, threads);
    std::cout << "sweep rows: " << rows.size() << ", wrote "
              << (spec.outputDir / "sweep.csv").string() << "\n";
    return 0;
  }
  const cim::ReportBundle b = cim::runExperiment(spec, threads);
  std::cout << "experiment " << b.name << ": " << b.perSeed.size()
            << " seeds, success fraction "
            << cim::formatDouble(b.successFraction) << " vs "
            << b.oracleMethod << " oracle "
            << cim::formatDouble(b.oracleEnergy) << "\n";
  std::cout << "outputs in " << spec.outputDir.string() << "\n";
  return 0;
}

int cmdSweep(const std::string& configFile, const std::vector<double>& grid,
             const std::string& outOverride, int threads) {
  cim::ExperimentSpec spec = cim::loadExperimentSpec(configFile);
  if (!outOverride.empty()) spec.outputDir = outOverride;
  const std::vector<double>& g = grid.empty() ? spec.pumpGrid : grid;
  const auto rows = cim::pumpSweep(spec, g, threads);
  for (const auto& r : rows)
    std::cout << cim::formatDouble(r.pumpMultiple) << "x: success "
              << cim::formatDouble(r.successFraction) << ", median steady tau "
              << cim::formatDouble(r.medianSteadyTau) << "\n";
  return 0;
}

int cmdAnneal(const std::string& graphFile, int sweeps, int restarts,
              std::uint64_t seed, int threads, const std::string& outFile) {
  const cim::GraphInstance g = cim::loadGraph(graphFile);
  cim::AnnealSchedule sched;
  sched.sweeps = sweeps;
  sched.restarts = restarts;
  const cim::AnnealResult r = cim::metropolisAnneal(g, sched, seed, threads);
  json doc = {
      {"method", "metropolis-anneal"},
      {"energy", r.energy},
      {"spins", r.spins},
      {"seed", seed},
      {"schedule",
       {{"sweeps", r.sweeps},
        {"restarts", r.restarts},
        {"t_start", r.tStart},
        {"t_end", r.tEnd}}},
  };
  if (outFile.empty())
    std::cout << doc.dump(2) << "\n";
  else {
    std::ofstream out(outFile);
    out << doc.dump(2) << "\n";
    std::cout << "wrote " << outFile << "\n";
  }
  return 0;
}

int cmdExact(const std::string& graphFile, const std::string& method,
             const std::string& outFile) {
  const cim::GraphInstance g = cim::loadGraph(graphFile);
  json doc;
  if (method == "circulant" || (method == "auto" && g.isCirculant())) {
    const cim::CirculantGroundState r = cim::circulantGroundState(g);
    doc = {{"method", "circulant-eigen"},
           {"energy", r.energy},
           {"spins", r.spins},
           {"eigen_bound", r.eigenBound},
           {"bound_attained", r.boundAttained},
           {"wave_index", r.waveIndex}};
  } else if (method == "brute-force" || method == "auto") {
    const cim::GroundState r = cim::bruteForceGroundState(g);
    doc = {{"method", "brute-force"}, {"energy", r.energy}, {"spins", r.spins}};
  } else {
    throw cim::ConfigError("exact method must be auto|circulant|brute-force");
  }
  if (outFile.empty())
    std::cout << doc.dump(2) << "\n";
  else {
    std::ofstream out(outFile);
    out << doc.dump(2) << "\n";
    std::cout << "wrote " << outFile << "\n";
  }
  return 0;
}

int cmdReport(const std::string& dir, int threads) {
  const cim::ReportBundle b = cim::recomputeReport(dir, threads);
  json perSeed = json::array();
  for (const auto& o : b.perSeed)
    perSeed.push_back({{"seed", o.seed},
                       {"final_energy", o.finalEnergy},
                       {"success", o.success}});
  json doc = {
      {"config_hash", b.configHashHex},
      {"name", b.name},
      {"oracle", {{"method", b.oracleMethod}, {"energy", b.oracleEnergy}}},
      {"success_fraction", b.successFraction},
      {"median_steady_tau", b.medianSteadyTau},
      {"per_seed", std::move(perSeed)},
  };
  std::cout << doc.dump(2) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"all-optical spatial coherent Ising machine simulator"};
  app.require_subcommand(1);

  // generate-graph
  auto* gen = app.add_subcommand("generate-graph", "emit a graph JSON file");
  std::string family = "mobius-ladder";
  int n = 112;
  std::uint64_t seed = 1;
  double alpha = -0.2, beta = 0.05, gamma = 0.03, p = 0.2;
  int m = -1;
  std::string outFile = "graph.json";
  gen->add_option("--family", family,
                  "mobius-ladder|complete|erdos-renyi|barabasi-albert");
  gen->add_option("--n", n, "number of sites");
  gen->add_option("--seed", seed, "graph seed");
  gen->add_option("--alpha", alpha, "ML edge weight");
  gen->add_option("--beta", beta, "ER/BA edge magnitude");
  gen->add_option("--gamma", gamma, "K edge magnitude");
  gen->add_option("--p", p, "ER/BA edge density target");
  gen->add_option("--m", m, "BA attachment count (default round(p*(n-1)/2))");
  gen->add_option("--out", outFile, "output file");

  // run
  auto* runCmd = app.add_subcommand("run", "run an experiment config");
  std::string configFile, presetOverride, outOverride;
  std::vector<std::uint64_t> seedOverride;
  int threads = 1;
  runCmd->add_option("--config", configFile, "experiment JSON")->required();
  runCmd->add_option("--preset", presetOverride, "preset override");
  runCmd->add_option("--out", outOverride, "output directory override");
  runCmd->add_option("--seed", seedOverride, "replace the seed list");
  runCmd->add_option("--threads", threads, "worker threads (never changes results)");

  // sweep
  auto* sweepCmd = app.add_subcommand("sweep", "pump sweep");
  std::string sweepConfig, sweepOut;
  std::vector<double> grid;
  int sweepThreads = 1;
  sweepCmd->add_option("--config", sweepConfig, "experiment JSON")->required();
  sweepCmd->add_option("--grid", grid, "pump multiples (default: config pump_grid)");
  sweepCmd->add_option("--out", sweepOut, "output directory override");
  sweepCmd->add_option("--threads", sweepThreads, "worker threads");

  // anneal
  auto* annealCmd = app.add_subcommand("anneal", "Metropolis annealing baseline");
  std::string annealGraph, annealOut;
  int sweeps = 2000, restarts = 20, annealThreads = 1;
  std::uint64_t annealSeed = 1;
  annealCmd->add_option("--graph", annealGraph, "graph JSON")->required();
  annealCmd->add_option("--sweeps", sweeps, "sweeps per chain");
  annealCmd->add_option("--restarts", restarts, "independent chains");
  annealCmd->add_option("--seed", annealSeed, "master seed");
  annealCmd->add_option("--threads", annealThreads, "worker threads");
  annealCmd->add_option("--out", annealOut, "output file (stdout if empty)");

  // exact
  auto* exactCmd = app.add_subcommand("exact", "exact/eigen ground state");
  std::string exactGraph, exactMethod = "auto", exactOut;
  exactCmd->add_option("--graph", exactGraph, "graph JSON")->required();
  exactCmd->add_option("--method", exactMethod, "auto|circulant|brute-force");
  exactCmd->add_option("--out", exactOut, "output file (stdout if empty)");

  // report
  auto* reportCmd = app.add_subcommand("report", "recompute an aggregate");
  std::string reportDir;
  int reportThreads = 1;
  reportCmd->add_option("--dir", reportDir, "experiment output directory")
      ->required();
  reportCmd->add_option("--threads", reportThreads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed())
      return cmdGenerateGraph(family, n, seed, alpha, beta, gamma, p, m,
                              outFile);
    if (runCmd->parsed())
      return cmdRun(configFile, presetOverride, outOverride, seedOverride,
                    threads);
    if (sweepCmd->parsed())
      return cmdSweep(sweepConfig, grid, sweepOut, sweepThreads);
    if (annealCmd->parsed())
      return cmdAnneal(annealGraph, sweeps, restarts, annealSeed,
                       annealThreads, annealOut);
    if (exactCmd->parsed()) return cmdExact(exactGraph, exactMethod, exactOut);
    if (reportCmd->parsed()) return cmdReport(reportDir, reportThreads);
  } catch (const cim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cim::DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cim::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
