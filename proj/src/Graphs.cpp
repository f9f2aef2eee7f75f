#include "cim/Graphs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "cim/Rng.hpp"

namespace cim {

using nlohmann::json;

std::string familyName(GraphFamily f) {
  switch (f) {
    case GraphFamily::MobiusLadder: return "mobius-ladder";
    case GraphFamily::Complete: return "complete";
    case GraphFamily::ErdosRenyi: return "erdos-renyi";
    case GraphFamily::BarabasiAlbert: return "barabasi-albert";
  }
  throw ConfigError("unknown graph family");
}

GraphFamily familyFromName(const std::string& name) {
  if (name == "mobius-ladder") return GraphFamily::MobiusLadder;
  if (name == "complete") return GraphFamily::Complete;
  if (name == "erdos-renyi") return GraphFamily::ErdosRenyi;
  if (name == "barabasi-albert") return GraphFamily::BarabasiAlbert;
  throw ConfigError("unknown graph family: " + name);
}

bool GraphInstance::isCirculant() const {
  for (int r = 1; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (jMatrix(r, c) != jMatrix(0, ((c - r) % n + n) % n)) return false;
  return true;
}

Eigen::VectorXd GraphInstance::circulantFirstRow() const {
  return jMatrix.row(0).transpose();
}

namespace {

int defaultAttachCount(int n, double p) {
  return static_cast<int>(std::lround(p * (n - 1) / 2.0));
}

std::vector<std::pair<int, int>> erdosRenyiPairs(int n, double p, Rng& rng) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform01() < p) pairs.emplace_back(i, j);
  return pairs;
}

std::vector<std::pair<int, int>> completePairs(int n) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  return pairs;
}

// Preferential attachment: node v >= m attaches to m distinct targets chosen
// by degree (uniform draws from the endpoint multiset). The first new node
// connects to all of the m seed nodes.
std::vector<std::pair<int, int>> barabasiAlbertPairs(int n, int m, Rng& rng) {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> endpoints; // one entry per edge endpoint
  for (int v = m; v < n; ++v) {
    std::set<int> targets;
    if (endpoints.empty()) {
      for (int t = 0; t < m; ++t) targets.insert(t);
    } else {
      while (static_cast<int>(targets.size()) < m)
        targets.insert(endpoints[rng.below(endpoints.size())]);
    }
    for (int t : targets) {
      pairs.emplace_back(std::min(t, v), std::max(t, v));
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

GraphInstance fromEdges(GraphFamily family, int n, const GraphParams& params,
                        std::uint64_t seed,
                        std::vector<std::tuple<int, int, double>> edges) {
  GraphInstance g;
  g.family = family;
  g.n = n;
  g.seed = seed;
  g.params = params;
  g.edges = std::move(edges);
  g.jMatrix = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j, w] : g.edges) {
    g.jMatrix(i, j) = w;
    g.jMatrix(j, i) = w;
  }
  g.achievedDensity =
      n >= 2 ? static_cast<double>(g.edges.size()) / (0.5 * n * (n - 1)) : 0.0;
  return g;
}

} // namespace

GraphInstance makeGraph(GraphFamily family, int n, const GraphParams& params,
                        std::uint64_t seed) {
  if (n < 2) throw ConfigError("graph needs at least 2 sites");

  std::vector<std::tuple<int, int, double>> edges;

  if (family == GraphFamily::MobiusLadder) {
    if (n % 2 != 0) throw ConfigError("Mobius ladder requires even n");
    for (int i = 0; i < n; ++i) {
      const int ring = (i + 1) % n;
      edges.emplace_back(std::min(i, ring), std::max(i, ring), params.alpha);
    }
    for (int i = 0; i < n / 2; ++i)
      edges.emplace_back(i, i + n / 2, params.alpha);
    std::sort(edges.begin(), edges.end());
    return fromEdges(family, n, params, seed, std::move(edges));
  }

  Rng rng(deriveSeed(seed, RngStream::Graph));
  std::vector<std::pair<int, int>> pairs;
  double magnitude = 0.0;
  switch (family) {
    case GraphFamily::Complete:
      pairs = completePairs(n);
      magnitude = params.gamma;
      break;
    case GraphFamily::ErdosRenyi:
      pairs = erdosRenyiPairs(n, params.edgeProbability, rng);
      magnitude = params.beta;
      break;
    case GraphFamily::BarabasiAlbert: {
      const int m = params.attachCount > 0
                        ? params.attachCount
                        : defaultAttachCount(n, params.edgeProbability);
      if (m < 1) throw ConfigError("Barabasi-Albert attach count must be >= 1");
      if (m >= n)
        throw ConfigError("Barabasi-Albert attach count must be < n");
      pairs = barabasiAlbertPairs(n, m, rng);
      magnitude = params.beta;
      break;
    }
    default:
      throw ConfigError("unhandled family");
  }

  // Signs consume one draw per present edge, in lexicographic order.
  edges.reserve(pairs.size());
  for (const auto& [i, j] : pairs)
    edges.emplace_back(i, j, rng.sign() * magnitude);
  return fromEdges(family, n, params, seed, std::move(edges));
}

void CouplingAssembly::validate() const {
  if (!(a > 0.0 && a < 1.0)) throw ConfigError("assembly a must lie in (0,1)");
  if (!(b >= 0.0)) throw ConfigError("assembly b must be >= 0");
}

CouplingOperator assembleQ(const GraphInstance& g, const CouplingAssembly& asm_,
                           bool allowActive) {
  asm_.validate();
  if (g.family == GraphFamily::MobiusLadder) {
    Eigen::VectorXcd kernel(g.n);
    const Eigen::VectorXd row = g.circulantFirstRow();
    for (int i = 0; i < g.n; ++i)
      kernel[i] = Complex((i == 0 ? asm_.a : 0.0) + asm_.b * row[i], 0.0);
    return CouplingOperator::circulant(kernel, allowActive);
  }
  Eigen::MatrixXcd q =
      (asm_.a * Eigen::MatrixXd::Identity(g.n, g.n) + asm_.b * g.jMatrix)
          .cast<Complex>();
  return CouplingOperator::dense(q, allowActive);
}

void saveGraph(const GraphInstance& g, const std::filesystem::path& path) {
  json jEdges = json::array();
  for (const auto& [i, j, w] : g.edges) jEdges.push_back({i, j, w});
  json doc = {
      {"family", familyName(g.family)},
      {"n", g.n},
      {"seed", g.seed},
      {"params", json::object()},
      {"achieved_density", g.achievedDensity},
      {"edges", jEdges},
  };
  switch (g.family) {
    case GraphFamily::MobiusLadder:
      doc["params"]["alpha"] = g.params.alpha;
      break;
    case GraphFamily::Complete:
      doc["params"]["gamma"] = g.params.gamma;
      break;
    case GraphFamily::ErdosRenyi:
      doc["params"]["beta"] = g.params.beta;
      doc["params"]["p"] = g.params.edgeProbability;
      break;
    case GraphFamily::BarabasiAlbert:
      doc["params"]["beta"] = g.params.beta;
      doc["params"]["p"] = g.params.edgeProbability;
      doc["params"]["m"] = g.params.attachCount > 0
                               ? g.params.attachCount
                               : defaultAttachCount(g.n, g.params.edgeProbability);
      break;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write graph file: " + path.string());
  out << doc.dump(2) << "\n";
}

namespace {

void validateLoaded(const GraphInstance& g) {
  std::set<std::pair<int, int>> seen;
  for (const auto& [i, j, w] : g.edges) {
    if (i < 0 || j >= g.n || i >= j)
      throw ConfigError("graph edge indices must satisfy 0 <= i < j < n");
    if (!seen.insert({i, j}).second)
      throw ConfigError("duplicate edge in graph file");
    switch (g.family) {
      case GraphFamily::MobiusLadder:
        if (w != g.params.alpha)
          throw ConfigError("Mobius ladder edges must all equal alpha");
        break;
      case GraphFamily::Complete:
        if (std::abs(w) != g.params.gamma)
          throw ConfigError("complete-graph weights must be +/-gamma");
        break;
      case GraphFamily::ErdosRenyi:
      case GraphFamily::BarabasiAlbert:
        if (std::abs(w) != g.params.beta)
          throw ConfigError("random-graph weights must be +/-beta");
        break;
    }
  }
  if (g.family == GraphFamily::MobiusLadder) {
    if (g.n % 2 != 0) throw ConfigError("Mobius ladder requires even n");
    std::set<std::pair<int, int>> expected;
    for (int i = 0; i < g.n; ++i) {
      const int ring = (i + 1) % g.n;
      expected.insert({std::min(i, ring), std::max(i, ring)});
    }
    for (int i = 0; i < g.n / 2; ++i) expected.insert({i, i + g.n / 2});
    if (seen != expected)
      throw ConfigError("Mobius ladder edge pattern is wrong");
  }
  if (g.family == GraphFamily::Complete &&
      g.edges.size() != static_cast<std::size_t>(g.n) * (g.n - 1) / 2)
    throw ConfigError("complete graph must contain every pair");
}

} // namespace

GraphInstance loadGraph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("graph file parse error: " + std::string(e.what()));
  }
  try {
    GraphInstance g;
    g.family = familyFromName(doc.at("family").get<std::string>());
    g.n = doc.at("n").get<int>();
    if (g.n < 2) throw ConfigError("graph needs at least 2 sites");
    g.seed = doc.at("seed").get<std::uint64_t>();
    const json& p = doc.at("params");
    switch (g.family) {
      case GraphFamily::MobiusLadder:
        g.params.alpha = p.at("alpha").get<double>();
        break;
      case GraphFamily::Complete:
        g.params.gamma = p.at("gamma").get<double>();
        break;
      case GraphFamily::ErdosRenyi:
        g.params.beta = p.at("beta").get<double>();
        g.params.edgeProbability = p.at("p").get<double>();
        break;
      case GraphFamily::BarabasiAlbert:
        g.params.beta = p.at("beta").get<double>();
        g.params.edgeProbability = p.at("p").get<double>();
        g.params.attachCount = p.at("m").get<int>();
        break;
    }
    std::vector<std::tuple<int, int, double>> edges;
    for (const json& e : doc.at("edges"))
      edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>(),
                         e.at(2).get<double>());
    std::sort(edges.begin(), edges.end());
    GraphInstance out =
        fromEdges(g.family, g.n, g.params, g.seed, std::move(edges));
    validateLoaded(out);
    return out;
  } catch (const json::exception& e) {
    throw ConfigError("graph file schema error: " + std::string(e.what()));
  }
}

} // namespace cim
