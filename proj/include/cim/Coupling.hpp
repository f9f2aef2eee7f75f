#ifndef CIM_COUPLING_HPP
#define CIM_COUPLING_HPP

#include <string>

#include <Eigen/Dense>

#include "cim/Errors.hpp"
#include "cim/NlmPhysics.hpp"

namespace cim {

// Intracavity coupling Q applied once per round trip. Two variants matching
// the two SLM configurations:
//   Circulant -- Fourier-plane modulation; apply() realizes
//                out_j = sum_i kernel[(i - j) mod N] * field_i
//                via FFT, with kernel[0] on the matrix diagonal.
//   Dense     -- real-space vector-matrix scheme; apply() is the plain
//                matrix-vector product out = Q * field.
// Operators are immutable after construction; apply() is pure and safe to
// call concurrently.
class CouplingOperator {
public:
  enum class Kind { Circulant, Dense };

  /// Build from a length-N kernel (first row of the materialized matrix).
  /// Rejects spectral radius > 1 - 1e-12 unless allowActive.
  static CouplingOperator circulant(const Eigen::VectorXcd& kernel,
                                    bool allowActive = false);

  /// Build from an N x N matrix. Same passivity rule.
  static CouplingOperator dense(const Eigen::MatrixXcd& matrix,
                                bool allowActive = false);

  Kind kind() const { return _kind; }
  Eigen::Index nSites() const { return _n; }
  double rho() const { return _rho; }
  bool isReal() const { return _isReal; }

  const Eigen::VectorXcd& kernel() const;
  const Eigen::MatrixXcd& matrix() const;

  /// Dense matrix with entries M(j, i) = kernel[(i - j) mod N]
  /// (circulant only; pins the index convention).
  Eigen::MatrixXcd materialize() const;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& field) const;

private:
  CouplingOperator() = default;

  Kind _kind = Kind::Dense;
  Eigen::Index _n = 0;
  double _rho = 0.0;
  bool _isReal = false;
  Eigen::VectorXcd _kernel;
  Eigen::VectorXcd _applySpectrum; // FFT of the index-reversed kernel
  Eigen::MatrixXcd _matrix;
};

/// Spectral radius: exact |DFT| maximum for circulant kernels; symmetric or
/// Hermitian eigendecomposition for matching dense matrices; power iteration
/// (relative tolerance 1e-8, at most 1e5 iterations) otherwise.
double spectralRadius(const CouplingOperator& op);

/// Power-iteration fallback used for general complex dense matrices.
double powerIterationRho(const Eigen::MatrixXcd& m, double relTol = 1e-8,
                         long maxIter = 100000);

/// Oscillation threshold pump: B0_th = -ln(rOut * rho(Q)) / kappaTilde,
/// in units of A0. Throws NoThresholdError when rOut * rho(Q) > 1 (or is 0).
double thresholdPump(const CouplingOperator& op, double rOut,
                     const NormalizedUnits& units);

/// SLM pixel grid.
struct PixelBudget {
  long mX = 1000;
  long mY = 1000;
};

struct BudgetReport {
  std::string scheme;   // "circulant" | "dense"
  bool fits = false;
  long capacity = 0;    // circulant: mX*mY sites; dense: mX sites
  long slack = 0;       // capacity - N
  long redundancy = 1;  // pixels per OPO (dense: mY)
};

/// Capacity check only; never throws.
BudgetReport validateBudget(const CouplingOperator& op,
                            const PixelBudget& budget);

} // namespace cim

#endif
