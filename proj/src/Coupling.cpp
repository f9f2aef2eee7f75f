#include "cim/Coupling.hpp"

#include <cmath>

#include <unsupported/Eigen/FFT>

namespace cim {

namespace {

constexpr double kPassivityTol = 1e-12;

bool allReal(const Eigen::VectorXcd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i].imag() != 0.0) return false;
  return true;
}

bool allReal(const Eigen::MatrixXcd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j).imag() != 0.0) return false;
  return true;
}

Eigen::VectorXcd fftForward(const Eigen::VectorXcd& v) {
  if (v.size() == 1) return v; // kissfft requires n >= 2
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out(v.size());
  fft.fwd(out, v);
  return out;
}

Eigen::VectorXcd fftInverse(const Eigen::VectorXcd& v) {
  if (v.size() == 1) return v;
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out(v.size());
  fft.inv(out, v);
  return out;
}

double denseRho(const Eigen::MatrixXcd& m) {
  // a*1 + b*J with real symmetric J is by far the common case; its spectrum
  // is real and cheap. Hermitian complex comes next; anything else falls
  // back to power iteration.
  if (allReal(m)) {
    Eigen::MatrixXd re = m.real();
    if (re == re.transpose()) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(re,
                                                        Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
  } else if (m == m.adjoint()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m,
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  return powerIterationRho(m);
}

} // namespace

double powerIterationRho(const Eigen::MatrixXcd& m, double relTol,
                         long maxIter) {
  const Eigen::Index n = m.rows();
  if (n == 0) return 0.0;
  if (m.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  // Deterministic start with a mild index-dependent slope so it is not
  // orthogonal to the dominant eigenvector of structured matrices.
  Eigen::VectorXcd x(n);
  for (Eigen::Index i = 0; i < n; ++i)
    x[i] = Complex(1.0 + 1e-3 * static_cast<double>(i % 7),
                   1e-4 * static_cast<double>(i % 3));
  x /= x.norm();

  // Converge on the phase-aligned eigenvector residual: once the iterate is
  // an eigenvector to accuracy eps, the norm-ratio estimate of |l1| is off
  // by O(eps^2), so eps^2 <= 0.01 * relTol bounds the answer to relTol.
  for (long it = 0; it < maxIter; ++it) {
    Eigen::VectorXcd y = m * x;
    const double est = y.norm();
    if (est == 0.0) return 0.0;
    y /= est;
    const Complex overlap = x.dot(y);
    double residual = 2.0;
    if (std::abs(overlap) > 0.0)
      residual = (y * (std::conj(overlap) / std::abs(overlap)) - x).norm();
    x = std::move(y);
    if (residual * residual <= 0.01 * relTol) return est;
  }
  throw ConvergenceError("power iteration did not converge within 1e5 steps");
}

CouplingOperator CouplingOperator::circulant(const Eigen::VectorXcd& kernel,
                                             bool allowActive) {
  if (kernel.size() == 0) throw DimensionError("empty circulant kernel");
  CouplingOperator op;
  op._kind = Kind::Circulant;
  op._n = kernel.size();
  op._kernel = kernel;
  op._isReal = allReal(kernel);

  // apply() computes sum_i kernel[(i-j) mod N] * x_i, which is the circular
  // convolution of x with the index-reversed kernel.
  Eigen::VectorXcd reversed(op._n);
  reversed[0] = kernel[0];
  for (Eigen::Index i = 1; i < op._n; ++i) reversed[i] = kernel[op._n - i];
  op._applySpectrum = fftForward(reversed);

  op._rho = fftForward(kernel).cwiseAbs().maxCoeff();
  if (!allowActive && op._rho > 1.0 - kPassivityTol)
    throw PassivityError("circulant operator is not passive: rho(Q) = " +
                         std::to_string(op._rho));
  return op;
}

CouplingOperator CouplingOperator::dense(const Eigen::MatrixXcd& matrix,
                                         bool allowActive) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols())
    throw DimensionError("dense coupling matrix must be square");
  CouplingOperator op;
  op._kind = Kind::Dense;
  op._n = matrix.rows();
  op._matrix = matrix;
  op._isReal = allReal(matrix);
  op._rho = denseRho(matrix);
  if (!allowActive && op._rho > 1.0 - kPassivityTol)
    throw PassivityError("dense operator is not passive: rho(Q) = " +
                         std::to_string(op._rho));
  return op;
}

const Eigen::VectorXcd& CouplingOperator::kernel() const {
  if (_kind != Kind::Circulant)
    throw DimensionError("kernel() requires a circulant operator");
  return _kernel;
}

const Eigen::MatrixXcd& CouplingOperator::matrix() const {
  if (_kind != Kind::Dense)
    throw DimensionError("matrix() requires a dense operator");
  return _matrix;
}

Eigen::MatrixXcd CouplingOperator::materialize() const {
  if (_kind != Kind::Circulant)
    throw DimensionError("materialize() requires a circulant operator");
  Eigen::MatrixXcd m(_n, _n);
  for (Eigen::Index j = 0; j < _n; ++j)
    for (Eigen::Index i = 0; i < _n; ++i)
      m(j, i) = _kernel[((i - j) % _n + _n) % _n];
  return m;
}

Eigen::VectorXcd CouplingOperator::apply(const Eigen::VectorXcd& field) const {
  if (field.size() != _n)
    throw DimensionError("field length " + std::to_string(field.size()) +
                         " does not match operator size " + std::to_string(_n));

  if (_kind == Kind::Dense) return _matrix * field;

  Eigen::VectorXcd spectrum = fftForward(field);
  spectrum.array() *= _applySpectrum.array();
  Eigen::VectorXcd out = fftInverse(spectrum);

  // A real operator maps the real subspace to itself; drop the FFT rounding
  // residue in the imaginary part so the closure is exact.
  if (_isReal && allReal(field))
    for (Eigen::Index i = 0; i < _n; ++i) out[i] = Complex(out[i].real(), 0.0);
  return out;
}

double spectralRadius(const CouplingOperator& op) { return op.rho(); }

double thresholdPump(const CouplingOperator& op, double rOut,
                     const NormalizedUnits& units) {
  units.validate();
  if (!(rOut > 0.0) || rOut > 1.0)
    throw ConfigError("rOut must lie in (0, 1]");
  const double g = rOut * op.rho();
  if (g <= 0.0)
    throw NoThresholdError("zero round-trip transmission, threshold undefined");
  if (g > 1.0)
    throw NoThresholdError(
        "round-trip linear gain exceeds unity at zero pump (rOut*rho = " +
        std::to_string(g) + ")");
  return -std::log(g) / units.kappaTilde;
}

BudgetReport validateBudget(const CouplingOperator& op,
                            const PixelBudget& budget) {
  BudgetReport r;
  const long n = static_cast<long>(op.nSites());
  if (op.kind() == CouplingOperator::Kind::Circulant) {
    r.scheme = "circulant";
    r.capacity = budget.mX * budget.mY;
    r.redundancy = 1;
  } else {
    r.scheme = "dense";
    r.capacity = budget.mX;
    r.redundancy = budget.mY;
  }
  r.slack = r.capacity - n;
  r.fits = r.slack >= 0;
  return r;
}

} // namespace cim
