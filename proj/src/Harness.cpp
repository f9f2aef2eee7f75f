#include "cim/Harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <thread>

namespace cim {

using nlohmann::json;

std::string presetName(Preset p) {
  switch (p) {
    case Preset::None: return "none";
    case Preset::Fig2Quadratures: return "fig2-quadratures";
    case Preset::Fig3Energy: return "fig3-energy";
    case Preset::PumpSweep: return "pump-sweep";
    case Preset::ThresholdCheck: return "threshold-check";
  }
  throw ConfigError("unknown preset");
}

Preset presetFromName(const std::string& name) {
  if (name == "none") return Preset::None;
  if (name == "fig2-quadratures") return Preset::Fig2Quadratures;
  if (name == "fig3-energy") return Preset::Fig3Energy;
  if (name == "pump-sweep") return Preset::PumpSweep;
  if (name == "threshold-check") return Preset::ThresholdCheck;
  throw ConfigError("unknown preset: " + name);
}

std::string formatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericalError("double formatting failed");
  return std::string(buf, ptr);
}

namespace {

void checkKeys(const json& obj, std::initializer_list<const char*> allowed,
               const std::string& context) {
  if (!obj.is_object())
    throw ConfigError(context + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) { ok = true; break; }
    if (!ok)
      throw ConfigError("unknown key \"" + it.key() + "\" in " + context);
  }
}

GraphSpec graphSpecFromJson(const json& doc) {
  GraphSpec g;
  g.family = familyFromName(doc.at("family").get<std::string>());
  switch (g.family) {
    case GraphFamily::MobiusLadder:
      checkKeys(doc, {"family", "n", "seed", "alpha"}, "graph");
      g.params.alpha = doc.value("alpha", g.params.alpha);
      break;
    case GraphFamily::Complete:
      checkKeys(doc, {"family", "n", "seed", "gamma"}, "graph");
      g.params.gamma = doc.value("gamma", g.params.gamma);
      break;
    case GraphFamily::ErdosRenyi:
      checkKeys(doc, {"family", "n", "seed", "beta", "p"}, "graph");
      g.params.beta = doc.value("beta", g.params.beta);
      g.params.edgeProbability = doc.value("p", g.params.edgeProbability);
      break;
    case GraphFamily::BarabasiAlbert:
      checkKeys(doc, {"family", "n", "seed", "beta", "p", "m"}, "graph");
      g.params.beta = doc.value("beta", g.params.beta);
      g.params.edgeProbability = doc.value("p", g.params.edgeProbability);
      g.params.attachCount = doc.value("m", g.params.attachCount);
      break;
  }
  g.n = doc.at("n").get<int>();
  g.seed = doc.at("seed").get<std::uint64_t>();
  return g;
}

json graphSpecToJson(const GraphSpec& g) {
  json doc = {{"family", familyName(g.family)}, {"n", g.n}, {"seed", g.seed}};
  switch (g.family) {
    case GraphFamily::MobiusLadder: doc["alpha"] = g.params.alpha; break;
    case GraphFamily::Complete: doc["gamma"] = g.params.gamma; break;
    case GraphFamily::ErdosRenyi:
      doc["beta"] = g.params.beta;
      doc["p"] = g.params.edgeProbability;
      break;
    case GraphFamily::BarabasiAlbert:
      doc["beta"] = g.params.beta;
      doc["p"] = g.params.edgeProbability;
      if (g.params.attachCount > 0) doc["m"] = g.params.attachCount;
      break;
  }
  return doc;
}

std::string recordFieldsName(RecordFields r) {
  switch (r) {
    case RecordFields::None: return "none";
    case RecordFields::Stats: return "stats";
    case RecordFields::Full: return "full";
  }
  throw ConfigError("unknown record_fields");
}

RecordFields recordFieldsFromName(const std::string& name) {
  if (name == "none") return RecordFields::None;
  if (name == "stats") return RecordFields::Stats;
  if (name == "full") return RecordFields::Full;
  throw ConfigError("record_fields must be none|stats|full");
}

} // namespace

json operatorToJson(const CouplingOperator& op) {
  json doc;
  if (op.kind() == CouplingOperator::Kind::Circulant) {
    doc["kind"] = "circulant";
    json kernel = json::array();
    for (Eigen::Index i = 0; i < op.nSites(); ++i)
      kernel.push_back({op.kernel()[i].real(), op.kernel()[i].imag()});
    doc["kernel"] = std::move(kernel);
  } else {
    doc["kind"] = "dense";
    doc["n"] = op.nSites();
    json mat = json::array(); // row-major
    for (Eigen::Index r = 0; r < op.nSites(); ++r)
      for (Eigen::Index c = 0; c < op.nSites(); ++c)
        mat.push_back({op.matrix()(r, c).real(), op.matrix()(r, c).imag()});
    doc["matrix"] = std::move(mat);
  }
  return doc;
}

CouplingOperator operatorFromJson(const json& doc, bool allowActive) {
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "circulant") {
      checkKeys(doc, {"kind", "kernel"}, "operator");
      const json& kernel = doc.at("kernel");
      Eigen::VectorXcd k(kernel.size());
      for (std::size_t i = 0; i < kernel.size(); ++i)
        k[static_cast<Eigen::Index>(i)] =
            Complex(kernel[i].at(0).get<double>(), kernel[i].at(1).get<double>());
      return CouplingOperator::circulant(k, allowActive);
    }
    if (kind == "dense") {
      checkKeys(doc, {"kind", "n", "matrix"}, "operator");
      const Eigen::Index n = doc.at("n").get<Eigen::Index>();
      const json& mat = doc.at("matrix");
      if (static_cast<Eigen::Index>(mat.size()) != n * n)
        throw ConfigError("dense operator matrix must hold n*n entries");
      Eigen::MatrixXcd m(n, n);
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
          const json& e = mat[static_cast<std::size_t>(r * n + c)];
          m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
        }
      return CouplingOperator::dense(m, allowActive);
    }
    throw ConfigError("operator kind must be circulant|dense");
  } catch (const json::exception& e) {
    throw ConfigError("operator schema error: " + std::string(e.what()));
  }
}

ExperimentSpec experimentFromJson(const json& doc) {
  try {
    checkKeys(doc,
              {"schema_version", "name", "preset", "graph", "coupling",
               "operator", "run", "seeds", "pump_grid", "output", "hardware"},
              "experiment config");
    ExperimentSpec spec;
    spec.schemaVersion = doc.at("schema_version").get<int>();
    if (spec.schemaVersion != 1)
      throw ConfigError("unsupported schema_version (expected 1)");
    spec.name = doc.value("name", spec.name);
    if (doc.contains("preset"))
      spec.preset = presetFromName(doc.at("preset").get<std::string>());

    // preset-managed defaults; explicit keys below override them
    switch (spec.preset) {
      case Preset::Fig2Quadratures:
        spec.run.nRoundTrips = 300;
        spec.run.recordFields = RecordFields::Full;
        spec.run.pump.timesThreshold = 1.2;
        break;
      case Preset::Fig3Energy:
        spec.run.nRoundTrips = 2000;
        break;
      case Preset::PumpSweep:
        spec.run.nRoundTrips = 2000;
        spec.run.pump.timesThreshold = 1.0; // replaced per grid point
        break;
      case Preset::ThresholdCheck:
        spec.run.pump.timesThreshold = 1.0; // bracketing sets its own pump
        break;
      case Preset::None:
        break;
    }

    const json& graph = doc.at("graph");
    if (graph.contains("file")) {
      checkKeys(graph, {"file"}, "graph");
      spec.graphFile = graph.at("file").get<std::string>();
    } else {
      spec.graph = graphSpecFromJson(graph);
    }

    if (doc.contains("coupling")) {
      const json& c = doc.at("coupling");
      checkKeys(c, {"a", "b"}, "coupling");
      spec.coupling.a = c.value("a", spec.coupling.a);
      spec.coupling.b = c.value("b", spec.coupling.b);
    }
    if (doc.contains("operator")) spec.operatorOverride = doc.at("operator");

    if (doc.contains("run")) {
      const json& r = doc.at("run");
      checkKeys(r,
                {"kappa_tilde", "r_out", "pump", "noise_amp", "n_round_trips",
                 "steps_per_pass", "record_fields", "per_trip_noise", "units"},
                "run");
      spec.run.units.kappaTilde =
          r.value("kappa_tilde", spec.run.units.kappaTilde);
      spec.run.rOut = r.value("r_out", spec.run.rOut);
      if (r.contains("pump")) {
        const json& p = r.at("pump");
        checkKeys(p, {"b0", "times_threshold"}, "run.pump");
        spec.run.pump = {};
        if (p.contains("b0")) spec.run.pump.b0 = p.at("b0").get<double>();
        if (p.contains("times_threshold"))
          spec.run.pump.timesThreshold = p.at("times_threshold").get<double>();
      }
      spec.run.noiseAmp = r.value("noise_amp", spec.run.noiseAmp);
      spec.run.nRoundTrips = r.value("n_round_trips", spec.run.nRoundTrips);
      spec.run.stepsPerPass = r.value("steps_per_pass", spec.run.stepsPerPass);
      if (r.contains("record_fields"))
        spec.run.recordFields =
            recordFieldsFromName(r.at("record_fields").get<std::string>());
      spec.run.perTripNoise = r.value("per_trip_noise", spec.run.perTripNoise);
      if (r.contains("units")) {
        const json& u = r.at("units");
        checkKeys(u,
                  {"a0_volts_per_m", "length_m", "chi2_m_per_v", "lambda_s_m",
                   "n_refr"},
                  "run.units");
        auto& nu = spec.run.units;
        nu.a0VoltsPerMeter = u.value("a0_volts_per_m", nu.a0VoltsPerMeter);
        nu.lengthMeters = u.value("length_m", nu.lengthMeters);
        nu.chi2MetersPerVolt = u.value("chi2_m_per_v", nu.chi2MetersPerVolt);
        nu.lambdaSignalMeters = u.value("lambda_s_m", nu.lambdaSignalMeters);
        nu.refractiveIndex = u.value("n_refr", nu.refractiveIndex);
      }
    }

    if (doc.contains("seeds")) {
      spec.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
      if (spec.seeds.empty()) throw ConfigError("seeds must be non-empty");
    } else {
      for (std::uint64_t s = 1; s <= 10; ++s) spec.seeds.push_back(s);
    }

    if (doc.contains("pump_grid"))
      spec.pumpGrid = doc.at("pump_grid").get<std::vector<double>>();
    if (spec.preset == Preset::PumpSweep && spec.pumpGrid.empty())
      throw ConfigError("pump-sweep preset requires a non-empty pump_grid");

    if (doc.contains("output")) {
      const json& o = doc.at("output");
      checkKeys(o, {"dir"}, "output");
      spec.outputDir = o.value("dir", spec.outputDir.string());
    }
    if (doc.contains("hardware")) {
      const json& h = doc.at("hardware");
      checkKeys(h, {"cavity_length_m", "refractive_index"}, "hardware");
      spec.hardware.cavityLengthMeters =
          h.value("cavity_length_m", spec.hardware.cavityLengthMeters);
      spec.hardware.refractiveIndex =
          h.value("refractive_index", spec.hardware.refractiveIndex);
    }

    spec.run.validate();
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError("config schema error: " + std::string(e.what()));
  }
}

json experimentToJson(const ExperimentSpec& spec) {
  json run = {
      {"kappa_tilde", spec.run.units.kappaTilde},
      {"r_out", spec.run.rOut},
      {"noise_amp", spec.run.noiseAmp},
      {"n_round_trips", spec.run.nRoundTrips},
      {"steps_per_pass", spec.run.stepsPerPass},
      {"record_fields", recordFieldsName(spec.run.recordFields)},
      {"per_trip_noise", spec.run.perTripNoise},
      {"units",
       {{"a0_volts_per_m", spec.run.units.a0VoltsPerMeter},
        {"length_m", spec.run.units.lengthMeters},
        {"chi2_m_per_v", spec.run.units.chi2MetersPerVolt},
        {"lambda_s_m", spec.run.units.lambdaSignalMeters},
        {"n_refr", spec.run.units.refractiveIndex}}},
  };
  if (spec.run.pump.b0) run["pump"] = {{"b0", *spec.run.pump.b0}};
  if (spec.run.pump.timesThreshold)
    run["pump"] = {{"times_threshold", *spec.run.pump.timesThreshold}};

  json doc = {
      {"schema_version", spec.schemaVersion},
      {"name", spec.name},
      {"preset", presetName(spec.preset)},
      {"coupling", {{"a", spec.coupling.a}, {"b", spec.coupling.b}}},
      {"run", std::move(run)},
      {"seeds", spec.seeds},
      {"output", {{"dir", spec.outputDir.string()}}},
      {"hardware",
       {{"cavity_length_m", spec.hardware.cavityLengthMeters},
        {"refractive_index", spec.hardware.refractiveIndex}}},
  };
  if (spec.graphFile)
    doc["graph"] = {{"file", spec.graphFile->string()}};
  else
    doc["graph"] = graphSpecToJson(*spec.graph);
  if (spec.operatorOverride) doc["operator"] = *spec.operatorOverride;
  if (!spec.pumpGrid.empty()) doc["pump_grid"] = spec.pumpGrid;
  return doc;
}

ExperimentSpec loadExperimentSpec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return experimentFromJson(doc);
}

std::uint64_t configHash(const ExperimentSpec& spec) {
  // The hash identifies the experiment, not its destination: the output
  // directory is excluded so a replay into a fresh directory reproduces
  // byte-identical files.
  json doc = experimentToJson(spec);
  doc.erase("output");
  const std::string canonical = doc.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string configHashHex(const ExperimentSpec& spec) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(configHash(spec)));
  return std::string(buf);
}

double roundTripSeconds(const HardwareSpec& hw) {
  constexpr double c = 299792458.0;
  return 2.0 * hw.refractiveIndex * hw.cavityLengthMeters / c;
}

namespace {

GraphInstance resolveGraph(const ExperimentSpec& spec) {
  if (spec.graphFile) return loadGraph(*spec.graphFile);
  if (!spec.graph) throw ConfigError("experiment needs a graph");
  return makeGraph(spec.graph->family, spec.graph->n, spec.graph->params,
                   spec.graph->seed);
}

CouplingOperator resolveOperator(const ExperimentSpec& spec,
                                 const GraphInstance& g) {
  if (spec.operatorOverride) {
    CouplingOperator op = operatorFromJson(*spec.operatorOverride);
    if (op.nSites() != g.n)
      throw DimensionError("operator override size does not match graph");
    return op;
  }
  return assembleQ(g, spec.coupling);
}

struct Oracle {
  std::string method;
  double energy = 0.0;
};

Oracle resolveOracle(const GraphInstance& g, int nThreads) {
  if (g.isCirculant())
    return {"circulant-eigen", circulantGroundState(g).energy};
  AnnealSchedule sched;
  return {"metropolis-anneal",
          metropolisAnneal(g, sched, g.seed, nThreads).energy};
}

long steadyTauOf(const Trajectory& t) {
  const std::uint64_t last = t.records.back().spinHash;
  long tau = t.records.back().tau;
  for (auto it = t.records.rbegin(); it != t.records.rend(); ++it) {
    if (it->spinHash != last) break;
    tau = it->tau;
  }
  return tau;
}

double medianOf(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void writeTrajectoryCsv(const std::filesystem::path& path, const Trajectory& t,
                        const std::string& hashHex, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "# config_hash=" << hashHex << " seed=" << seed << "\n";
  out << "tau,ising_energy,mean_abs_re,mean_abs_im,max_abs,spins_changed\n";
  for (const TrajectoryRecord& r : t.records)
    out << r.tau << ',' << formatDouble(r.isingEnergy) << ','
        << formatDouble(r.meanAbsRe) << ',' << formatDouble(r.meanAbsIm) << ','
        << formatDouble(r.maxAbs) << ',' << r.spinsChanged << "\n";
}

void writeQuadraturesCsv(const std::filesystem::path& path,
                         const Trajectory& t, const std::string& hashHex,
                         std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "# config_hash=" << hashHex << " seed=" << seed << "\n";
  out << "tau,site,re,im\n";
  for (std::size_t f = 0; f < t.snapshots.size(); ++f) {
    const Eigen::VectorXcd& a = t.snapshots[f];
    for (Eigen::Index i = 0; i < a.size(); ++i)
      out << t.records[f].tau << ',' << i << ','
          << formatDouble(a[i].real()) << ',' << formatDouble(a[i].imag())
          << "\n";
  }
}

void writeSnapshots(const std::filesystem::path& dir, const Trajectory& t,
                    const std::string& hashHex, std::uint64_t seed) {
  static_assert(sizeof(float) == 4);
  std::ofstream bin(dir / "snapshots.bin", std::ios::binary);
  if (!bin) throw ConfigError("cannot write snapshots.bin");
  for (const Eigen::VectorXcd& a : t.snapshots) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const float re = static_cast<float>(a[i].real());
      const float im = static_cast<float>(a[i].imag());
      bin.write(reinterpret_cast<const char*>(&re), 4);
      bin.write(reinterpret_cast<const char*>(&im), 4);
    }
  }
  const Eigen::Index n = t.snapshots.empty() ? 0 : t.snapshots[0].size();
  json index = {
      {"config_hash", hashHex},
      {"seed", seed},
      {"dtype", "complex64"},
      {"byte_order", "little"},
      {"n_sites", n},
      {"n_frames", t.snapshots.size()},
      {"frame_bytes", 8 * n},
      {"file", "snapshots.bin"},
  };
  json taus = json::array();
  for (std::size_t f = 0; f < t.snapshots.size(); ++f)
    taus.push_back(t.records[f].tau);
  index["taus"] = std::move(taus);
  std::ofstream idx(dir / "snapshots_index.json");
  idx << index.dump(2) << "\n";
}

void writeSeedSummary(const std::filesystem::path& path, const Trajectory& t,
                      const SeedOutcome& o, const std::string& hashHex) {
  json doc = {
      {"config_hash", hashHex},
      {"seed", o.seed},
      {"final_energy", o.finalEnergy},
      {"final_spins", t.finalSpins},
      {"converged", o.converged},
      {"oscillating", o.oscillating},
      {"steady_tau", o.steadyTau},
      {"success", o.success},
      {"threshold", t.threshold},
      {"rho_q", t.rhoQ},
      {"pump_b0", t.pumpB0},
  };
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

struct SeedError {
  std::uint64_t seed = 0;
  bool config = false;
  std::string what;
};

struct SeedRun {
  std::vector<SeedOutcome> outcomes;
  double threshold = 0.0;
  double rhoQ = 0.0;
  double pumpB0 = 0.0;
};

SeedRun runSeeds(const ExperimentSpec& spec, const GraphInstance& g,
                 const CouplingOperator& op, double oracleEnergy,
                 bool writeFiles, const std::string& hashHex, int nThreads) {
  const std::vector<std::uint64_t>& seeds = spec.seeds;
  SeedRun result;
  result.outcomes.resize(seeds.size());
  std::vector<SeedError> errors(seeds.size());
  std::vector<char> failed(seeds.size(), 0);

  const int pool = std::max(1, std::min<int>(nThreads, seeds.size()));
  const int inner = seeds.size() == 1 ? nThreads : 1;

  auto runOne = [&](std::size_t idx) {
    const std::uint64_t seed = seeds[idx];
    try {
      RunConfig cfg = spec.run;
      cfg.seed = seed;
      const Trajectory t = run(g, op, cfg, inner);

      SeedOutcome o;
      o.seed = seed;
      o.finalEnergy = t.records.back().isingEnergy;
      o.converged = t.converged;
      o.oscillating = t.records.back().maxAbs >= t.records.front().maxAbs;
      o.steadyTau = steadyTauOf(t);
      o.success = o.finalEnergy <= oracleEnergy + 1e-9;
      result.outcomes[idx] = o;
      if (idx == 0) {
        result.threshold = t.threshold;
        result.rhoQ = t.rhoQ;
        result.pumpB0 = t.pumpB0;
      }

      if (writeFiles) {
        const std::filesystem::path dir =
            spec.outputDir / ("seed_" + std::to_string(seed));
        std::filesystem::create_directories(dir);
        writeTrajectoryCsv(dir / "trajectory.csv", t, hashHex, seed);
        writeSeedSummary(dir / "summary.json", t, o, hashHex);
        if (spec.run.recordFields == RecordFields::Full) {
          writeSnapshots(dir, t, hashHex, seed);
          if (spec.preset == Preset::Fig2Quadratures)
            writeQuadraturesCsv(dir / "quadratures.csv", t, hashHex, seed);
        }
      }
    } catch (const ConfigError& e) {
      failed[idx] = 1;
      errors[idx] = {seed, true, e.what()};
    } catch (const std::exception& e) {
      failed[idx] = 1;
      errors[idx] = {seed, false, e.what()};
    }
  };

  if (pool == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) runOne(i);
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < pool; ++t)
      threads.emplace_back([&, t] {
        for (std::size_t i = t; i < seeds.size(); i += pool) runOne(i);
      });
    for (auto& th : threads) th.join();
  }

  // Partial results stay on disk; the first failing seed is surfaced.
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (failed[i]) {
      const std::string msg =
          "seed " + std::to_string(errors[i].seed) + ": " + errors[i].what;
      if (errors[i].config) throw ConfigError(msg);
      throw NumericalError(msg);
    }
  }
  return result;
}

json bundleToJson(const ReportBundle& b, long nRoundTrips) {
  json perSeed = json::array();
  for (const SeedOutcome& o : b.perSeed)
    perSeed.push_back({{"seed", o.seed},
                       {"final_energy", o.finalEnergy},
                       {"converged", o.converged},
                       {"oscillating", o.oscillating},
                       {"steady_tau", o.steadyTau},
                       {"success", o.success}});
  return json{
      {"config_hash", b.configHashHex},
      {"name", b.name},
      {"oracle", {{"method", b.oracleMethod}, {"energy", b.oracleEnergy}}},
      {"threshold", b.threshold},
      {"rho_q", b.rhoQ},
      {"pump_b0", b.pumpB0},
      {"n_seeds", b.perSeed.size()},
      {"success_fraction", b.successFraction},
      {"median_steady_tau", b.medianSteadyTau},
      {"hardware_time",
       {{"tau_round_trip_s", b.tauRoundTripSeconds},
        {"total_time_s", b.totalTimeSeconds},
        {"n_round_trips", nRoundTrips},
        {"note", "estimate, never simulated"}}},
      {"per_seed", std::move(perSeed)},
  };
}

ReportBundle buildBundle(const ExperimentSpec& spec, const Oracle& oracle,
                         const SeedRun& runData, const std::string& hashHex) {
  ReportBundle b;
  b.name = spec.name;
  b.configHashHex = hashHex;
  b.oracleEnergy = oracle.energy;
  b.oracleMethod = oracle.method;
  b.threshold = runData.threshold;
  b.rhoQ = runData.rhoQ;
  b.pumpB0 = runData.pumpB0;
  b.perSeed = runData.outcomes;
  int nSuccess = 0;
  std::vector<double> taus;
  for (const SeedOutcome& o : b.perSeed) {
    nSuccess += o.success;
    taus.push_back(static_cast<double>(o.steadyTau));
  }
  b.successFraction =
      b.perSeed.empty() ? 0.0 : static_cast<double>(nSuccess) / b.perSeed.size();
  b.medianSteadyTau = medianOf(std::move(taus));
  b.tauRoundTripSeconds = roundTripSeconds(spec.hardware);
  b.totalTimeSeconds = b.tauRoundTripSeconds * spec.run.nRoundTrips;
  return b;
}

} // namespace

ReportBundle runExperiment(const ExperimentSpec& spec, int nThreads) {
  spec.run.validate();
  if (spec.seeds.empty()) throw ConfigError("experiment needs seeds");

  const GraphInstance g = resolveGraph(spec);
  const CouplingOperator op = resolveOperator(spec, g);
  const std::string hashHex = configHashHex(spec);

  std::filesystem::create_directories(spec.outputDir);
  {
    std::ofstream cfg(spec.outputDir / "config.json");
    if (!cfg) throw ConfigError("cannot write config.json");
    cfg << experimentToJson(spec).dump(2) << "\n";
  }

  if (spec.preset == Preset::ThresholdCheck) {
    const ThresholdCheck tc = thresholdCheck(op.rho(), spec.run.rOut,
                                             spec.run.units);
    json doc = {
        {"config_hash", hashHex},
        {"rho", tc.rho},
        {"r_out", tc.rOut},
        {"kappa_tilde", spec.run.units.kappaTilde},
        {"formula_threshold", tc.formulaThreshold},
        {"decays_at_0.99x", tc.decaysBelow},
        {"grows_at_1.01x", tc.growsAbove},
        {"consistent_within_1pc", tc.consistent},
    };
    std::ofstream out(spec.outputDir / "threshold_check.json");
    out << doc.dump(2) << "\n";
    ReportBundle b;
    b.name = spec.name;
    b.configHashHex = hashHex;
    b.threshold = tc.formulaThreshold;
    b.rhoQ = tc.rho;
    b.oracleMethod = "threshold-formula";
    b.successFraction = tc.consistent ? 1.0 : 0.0;
    b.tauRoundTripSeconds = roundTripSeconds(spec.hardware);
    b.totalTimeSeconds = b.tauRoundTripSeconds * spec.run.nRoundTrips;
    return b;
  }

  const Oracle oracle = resolveOracle(g, nThreads);
  const SeedRun runData =
      runSeeds(spec, g, op, oracle.energy, /*writeFiles=*/true, hashHex,
               nThreads);
  const ReportBundle bundle = buildBundle(spec, oracle, runData, hashHex);

  std::ofstream agg(spec.outputDir / "aggregate.json");
  if (!agg) throw ConfigError("cannot write aggregate.json");
  agg << bundleToJson(bundle, spec.run.nRoundTrips).dump(2) << "\n";
  return bundle;
}

ReportBundle recomputeReport(const std::filesystem::path& outputDir,
                             int nThreads) {
  const ExperimentSpec spec = loadExperimentSpec(outputDir / "config.json");
  const GraphInstance g = resolveGraph(spec);
  const Oracle oracle = resolveOracle(g, nThreads);
  const std::string hashHex = configHashHex(spec);

  SeedRun runData;
  for (std::uint64_t seed : spec.seeds) {
    const std::filesystem::path p =
        outputDir / ("seed_" + std::to_string(seed)) / "summary.json";
    std::ifstream in(p);
    if (!in) throw ConfigError("missing per-seed summary: " + p.string());
    json doc;
    in >> doc;
    SeedOutcome o;
    o.seed = doc.at("seed").get<std::uint64_t>();
    o.finalEnergy = doc.at("final_energy").get<double>();
    o.converged = doc.at("converged").get<bool>();
    o.oscillating = doc.at("oscillating").get<bool>();
    o.steadyTau = doc.at("steady_tau").get<long>();
    o.success = o.finalEnergy <= oracle.energy + 1e-9; // recounted
    runData.outcomes.push_back(o);
    runData.threshold = doc.at("threshold").get<double>();
    runData.rhoQ = doc.at("rho_q").get<double>();
    runData.pumpB0 = doc.at("pump_b0").get<double>();
  }
  return buildBundle(spec, oracle, runData, hashHex);
}

std::vector<SweepRow> pumpSweep(const ExperimentSpec& spec,
                                const std::vector<double>& grid,
                                int nThreads) {
  if (grid.empty()) throw ConfigError("pump sweep needs a non-empty grid");
  const GraphInstance g = resolveGraph(spec);
  const CouplingOperator op = resolveOperator(spec, g);
  const Oracle oracle = resolveOracle(g, nThreads);

  std::vector<SweepRow> rows;
  for (double mult : grid) {
    ExperimentSpec point = spec;
    point.run.pump = {};
    point.run.pump.timesThreshold = mult;
    const std::string hashHex = configHashHex(point);
    const SeedRun runData = runSeeds(point, g, op, oracle.energy,
                                     /*writeFiles=*/false, hashHex, nThreads);
    SweepRow row;
    row.pumpMultiple = mult;
    row.oscillating = true;
    for (const SeedOutcome& o : runData.outcomes)
      row.oscillating = row.oscillating && o.oscillating;
    if (row.oscillating) {
      int nSuccess = 0;
      std::vector<double> taus;
      for (const SeedOutcome& o : runData.outcomes) {
        nSuccess += o.success;
        taus.push_back(static_cast<double>(o.steadyTau));
      }
      row.successFraction =
          static_cast<double>(nSuccess) / runData.outcomes.size();
      row.medianSteadyTau = medianOf(std::move(taus));
    } else {
      // below threshold: no oscillation, energies undefined
      row.successFraction = std::numeric_limits<double>::quiet_NaN();
      row.medianSteadyTau = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }

  std::filesystem::create_directories(spec.outputDir);
  std::ofstream out(spec.outputDir / "sweep.csv");
  if (!out) throw ConfigError("cannot write sweep.csv");
  out << "# config_hash=" << configHashHex(spec) << "\n";
  out << "pump_multiple,oscillating,success_fraction,median_steady_tau\n";
  for (const SweepRow& r : rows)
    out << formatDouble(r.pumpMultiple) << ',' << (r.oscillating ? 1 : 0)
        << ',' << formatDouble(r.successFraction) << ','
        << formatDouble(r.medianSteadyTau) << "\n";
  return rows;
}

ThresholdCheck thresholdCheck(double rho, double rOut,
                              const NormalizedUnits& units, long nRoundTrips) {
  ThresholdCheck tc;
  tc.rho = rho;
  tc.rOut = rOut;

  Eigen::VectorXcd kernel(1);
  kernel[0] = Complex(rho, 0.0);
  const CouplingOperator op =
      CouplingOperator::circulant(kernel, /*allowActive=*/true);
  tc.formulaThreshold = thresholdPump(op, rOut, units);

  auto grows = [&](double pumpB0) {
    RunConfig cfg;
    cfg.units = units;
    cfg.rOut = rOut;
    cfg.pump.b0 = pumpB0;
    cfg.stepsPerPass = 100;
    FieldState s;
    s.amplitudes.resize(1);
    s.amplitudes[0] = Complex(1e-5, 0.0);
    const double initial = std::abs(s.amplitudes[0]);
    for (long t = 0; t < nRoundTrips; ++t)
      s = roundTrip(s, op, cfg, pumpB0, 1);
    return std::abs(s.amplitudes[0]) > initial;
  };

  tc.decaysBelow = !grows(0.99 * tc.formulaThreshold);
  tc.growsAbove = grows(1.01 * tc.formulaThreshold);
  tc.consistent = tc.decaysBelow && tc.growsAbove;
  return tc;
}

} // namespace cim
