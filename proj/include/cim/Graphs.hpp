#ifndef CIM_GRAPHS_HPP
#define CIM_GRAPHS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "cim/Coupling.hpp"
#include "cim/Errors.hpp"

namespace cim {

enum class GraphFamily { MobiusLadder, Complete, ErdosRenyi, BarabasiAlbert };

std::string familyName(GraphFamily f);
GraphFamily familyFromName(const std::string& name);

struct GraphParams {
  double alpha = -0.2;          // ML edge weight
  double gamma = 0.03;          // K edge magnitude
  double beta = 0.05;           // ER/BA edge magnitude
  double edgeProbability = 0.2; // ER density / BA density target
  int attachCount = -1;         // BA m; -1 selects round(p*(n-1)/2)
};

// Symmetric zero-diagonal coupling matrix plus the metadata needed to
// rebuild it bit-identically. Edges are stored with i < j in lexicographic
// order; the sign draw for random families consumes one RNG call per present
// edge in exactly that order.
struct GraphInstance {
  GraphFamily family = GraphFamily::MobiusLadder;
  int n = 0;
  std::uint64_t seed = 0;
  GraphParams params;
  std::vector<std::tuple<int, int, double>> edges; // (i, j, w), i < j
  Eigen::MatrixXd jMatrix;
  double achievedDensity = 0.0;

  bool isCirculant() const; // structural check, row r == row 0 rotated by r
  Eigen::VectorXd circulantFirstRow() const;
};

/// Deterministic construction; the graph RNG stream is split from `seed`.
/// ML takes no random draws and requires even n; BA requires m < n.
GraphInstance makeGraph(GraphFamily family, int n, const GraphParams& params,
                        std::uint64_t seed);

/// Q = a*1 + b*J weights.
struct CouplingAssembly {
  double a = 0.96;
  double b = 0.04;
  void validate() const; // a in (0,1), b >= 0
};

/// ML maps to a circulant operator (kernel = first row of a*1 + b*J); the
/// other families map to dense operators. Passivity is enforced here.
CouplingOperator assembleQ(const GraphInstance& g, const CouplingAssembly& asm_,
                           bool allowActive = false);

/// JSON graph file: family, n, params, seed and the explicit edge list.
/// The loader revalidates the family invariants.
void saveGraph(const GraphInstance& g, const std::filesystem::path& path);
GraphInstance loadGraph(const std::filesystem::path& path);

} // namespace cim

#endif
