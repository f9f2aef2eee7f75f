#ifndef CIM_HARNESS_HPP
#define CIM_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cim/Machine.hpp"
#include "cim/Oracles.hpp"

namespace cim {

enum class Preset { None, Fig2Quadratures, Fig3Energy, PumpSweep, ThresholdCheck };

std::string presetName(Preset p);
Preset presetFromName(const std::string& name);

/// Inline graph description inside an experiment config.
struct GraphSpec {
  GraphFamily family = GraphFamily::MobiusLadder;
  int n = 112;
  std::uint64_t seed = 1;
  GraphParams params;
};

struct HardwareSpec {
  double cavityLengthMeters = 1.0;
  double refractiveIndex = 2.0;
};

// A fully-resolved experiment: one graph, one coupling assembly, one run
// configuration, many noise seeds. Parsed from a strict-schema JSON file
// (unknown keys are rejected; schema_version is required).
struct ExperimentSpec {
  int schemaVersion = 1;
  std::string name = "experiment";
  Preset preset = Preset::None;
  std::optional<std::filesystem::path> graphFile;
  std::optional<GraphSpec> graph; // exactly one of graph / graphFile
  CouplingAssembly coupling;
  std::optional<nlohmann::json> operatorOverride; // serialized operator
  RunConfig run; // run.seed is ignored; seeds below drive the noise
  std::vector<std::uint64_t> seeds;
  std::vector<double> pumpGrid; // pump-sweep preset
  std::filesystem::path outputDir = "out";
  HardwareSpec hardware;
};

ExperimentSpec experimentFromJson(const nlohmann::json& doc);
nlohmann::json experimentToJson(const ExperimentSpec& spec);
ExperimentSpec loadExperimentSpec(const std::filesystem::path& path);

/// FNV-1a over the canonical (sorted-key) dump of the resolved config; this
/// hash is stamped on every output file.
std::uint64_t configHash(const ExperimentSpec& spec);
std::string configHashHex(const ExperimentSpec& spec);

/// Exact-round-trip operator serialization: kernel or row-major matrix as
/// [re, im] pairs.
nlohmann::json operatorToJson(const CouplingOperator& op);
CouplingOperator operatorFromJson(const nlohmann::json& doc,
                                  bool allowActive = false);

struct SeedOutcome {
  std::uint64_t seed = 0;
  double finalEnergy = 0.0;
  bool converged = false;
  bool oscillating = false;
  long steadyTau = 0;
  bool success = false; // final energy <= oracle + 1e-9
};

struct ReportBundle {
  std::string name;
  std::string configHashHex;
  double oracleEnergy = 0.0;
  std::string oracleMethod; // "circulant-eigen" | "metropolis-anneal"
  double threshold = 0.0;
  double rhoQ = 0.0;
  double pumpB0 = 0.0;
  std::vector<SeedOutcome> perSeed;
  double successFraction = 0.0;
  double medianSteadyTau = 0.0;
  // hardware-time estimate, never simulated
  double tauRoundTripSeconds = 0.0;
  double totalTimeSeconds = 0.0;
};

/// Round-trip time estimate 2 n D / c for the configured cavity.
double roundTripSeconds(const HardwareSpec& hw);

/// Execute every seed (worker pool; per-seed outputs go to distinct files),
/// write CSV/JSON outputs plus the resolved config, and aggregate. Thread
/// count never changes any output byte.
ReportBundle runExperiment(const ExperimentSpec& spec, int nThreads = 1);

/// Recompute the aggregate of a finished experiment directory from the
/// per-seed summaries (consistency path for the `report` subcommand).
ReportBundle recomputeReport(const std::filesystem::path& outputDir,
                             int nThreads = 1);

struct SweepRow {
  double pumpMultiple = 0.0;
  bool oscillating = false;
  double successFraction = 0.0; // NaN when not oscillating
  double medianSteadyTau = 0.0; // NaN when not oscillating
};

/// Success fraction and median steady-state round trip per pump multiple;
/// writes sweep.csv into the output directory.
std::vector<SweepRow> pumpSweep(const ExperimentSpec& spec,
                                const std::vector<double>& grid,
                                int nThreads = 1);

struct ThresholdCheck {
  double rho = 0.0;
  double rOut = 0.0;
  double formulaThreshold = 0.0;
  bool decaysBelow = false; // at 0.99 x formula
  bool growsAbove = false;  // at 1.01 x formula
  bool consistent = false;  // both brackets hold -> agreement within 1%
};

/// Single-site growth/decay bracketing of the threshold formula.
ThresholdCheck thresholdCheck(double rho, double rOut,
                              const NormalizedUnits& units,
                              long nRoundTrips = 600);

/// Shortest exact-round-trip decimal for doubles (used for all CSV output).
std::string formatDouble(double v);

} // namespace cim

#endif
