#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cim/Coupling.hpp"
#include "cim/Graphs.hpp"
#include "cim/Rng.hpp"

using namespace cim;

namespace {

Eigen::VectorXcd randomComplex(int n, Rng& rng, double scale = 1.0) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) {
    const auto [x, y] = rng.gaussianPair();
    v[i] = Complex(x, y) * scale;
  }
  return v;
}

// Independent oracle: out_j = sum_i kernel[(i - j) mod N] * x_i.
Eigen::VectorXcd directApply(const Eigen::VectorXcd& kernel,
                             const Eigen::VectorXcd& x) {
  const int n = static_cast<int>(kernel.size());
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out[j] += kernel[((i - j) % n + n) % n] * x[i];
  return out;
}

} // namespace

TEST_CASE("identity kernel maps any field to itself") {
  Rng rng(5);
  Eigen::VectorXcd kernel = Eigen::VectorXcd::Zero(16);
  kernel[0] = Complex(1.0, 0.0);
  const auto op = CouplingOperator::circulant(kernel, /*allowActive=*/true);
  const Eigen::VectorXcd x = randomComplex(16, rng);
  const Eigen::VectorXcd y = op.apply(x);
  CHECK((y - x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(op.rho() == doctest::Approx(1.0));
}

TEST_CASE("FFT path matches direct summation for random kernels") {
  Rng rng(17);
  for (int n : {4, 17, 64, 112}) {
    const Eigen::VectorXcd kernel = randomComplex(n, rng, 0.1);
    const auto op = CouplingOperator::circulant(kernel, /*allowActive=*/true);
    const Eigen::VectorXcd x = randomComplex(n, rng);
    const Eigen::VectorXcd viaFft = op.apply(x);
    const Eigen::VectorXcd viaSum = directApply(kernel, x);
    const double rel = (viaFft - viaSum).cwiseAbs().maxCoeff() /
                       viaSum.cwiseAbs().maxCoeff();
    CHECK(rel < 1e-10);
  }
}

TEST_CASE("materialized circulant equals the convention and the FFT path") {
  Rng rng(23);
  const Eigen::VectorXcd kernel = randomComplex(9, rng, 0.05);
  const auto op = CouplingOperator::circulant(kernel, /*allowActive=*/true);
  const Eigen::MatrixXcd m = op.materialize();
  // kernel's first element sits on the diagonal; row 0 is the kernel itself
  for (int i = 0; i < 9; ++i) {
    CHECK(m(i, i) == kernel[0]);
    CHECK(m(0, i) == kernel[i]);
  }
  const Eigen::VectorXcd x = randomComplex(9, rng);
  const Eigen::VectorXcd dense = m * x;
  const Eigen::VectorXcd fft = op.apply(x);
  CHECK((dense - fft).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ML operator row sum on a constant field") {
  const GraphInstance g = makeGraph(GraphFamily::MobiusLadder, 112, {}, 0);
  const CouplingOperator q = assembleQ(g, {});
  const Eigen::VectorXcd ones = Eigen::VectorXcd::Constant(112, Complex(1, 0));
  const Eigen::VectorXcd out = q.apply(ones);
  for (int i = 0; i < 112; ++i)
    CHECK(out[i].real() == doctest::Approx(0.936).epsilon(1e-12));
}

TEST_CASE("circulant spectral radius equals the dense one") {
  Rng rng(31);
  for (int n : {8, 33, 128}) {
    const Eigen::VectorXcd kernel = randomComplex(n, rng, 0.05);
    const auto circ = CouplingOperator::circulant(kernel, true);
    const auto dense = CouplingOperator::dense(circ.materialize(), true);
    CHECK(std::abs(circ.rho() - dense.rho()) < 1e-8);
  }
}

TEST_CASE("spectral radius from explicit DFT values") {
  // kernel with DFT {0.5, -0.3, 0.1}: rho = 0.5
  const int n = 3;
  Eigen::VectorXcd spectrum(n);
  spectrum << Complex(0.5, 0), Complex(-0.3, 0), Complex(0.1, 0);
  // kernel = IDFT(spectrum)
  Eigen::VectorXcd kernel(n);
  for (int j = 0; j < n; ++j) {
    Complex s(0, 0);
    for (int k = 0; k < n; ++k)
      s += spectrum[k] * std::polar(1.0, 2.0 * M_PI * j * k / n);
    kernel[j] = s / static_cast<double>(n);
  }
  const auto op = CouplingOperator::circulant(kernel);
  CHECK(op.rho() == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("apply is linear") {
  Rng rng(41);
  const Eigen::VectorXcd kernel = randomComplex(24, rng, 0.05);
  const auto op = CouplingOperator::circulant(kernel, true);
  const Eigen::VectorXcd x = randomComplex(24, rng);
  const Eigen::VectorXcd y = randomComplex(24, rng);
  const Complex c(0.7, -1.3);
  const Eigen::VectorXcd lhs = op.apply(x + y);
  const Eigen::VectorXcd rhs = op.apply(x) + op.apply(y);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXcd lhs2 = op.apply(c * x);
  const Eigen::VectorXcd rhs2 = c * op.apply(x).eval();
  CHECK((lhs2 - rhs2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("paper parameter set keeps rho near 0.98 for every family") {
  const CouplingAssembly asm_{};
  GraphParams params;
  for (GraphFamily f : {GraphFamily::MobiusLadder, GraphFamily::Complete,
                        GraphFamily::ErdosRenyi, GraphFamily::BarabasiAlbert}) {
    const GraphInstance g = makeGraph(f, 112, params, 7);
    const CouplingOperator q = assembleQ(g, asm_);
    CHECK(q.rho() > 0.97);
    CHECK(q.rho() < 0.99);
    CHECK(q.kind() == (f == GraphFamily::MobiusLadder
                           ? CouplingOperator::Kind::Circulant
                           : CouplingOperator::Kind::Dense));
  }
}

TEST_CASE("passivity is enforced at construction") {
  Eigen::VectorXcd kernel = Eigen::VectorXcd::Zero(4);
  kernel[0] = Complex(1.2, 0.0);
  CHECK_THROWS_AS(CouplingOperator::circulant(kernel), PassivityError);
  CHECK_NOTHROW(CouplingOperator::circulant(kernel, /*allowActive=*/true));
}

TEST_CASE("threshold pump formula and edge cases") {
  const NormalizedUnits units{};
  SUBCASE("lossless cavity has zero threshold") {
    Eigen::VectorXcd k(1);
    k[0] = Complex(1.0, 0.0);
    const auto op = CouplingOperator::circulant(k, true);
    CHECK(thresholdPump(op, 1.0, units) == doctest::Approx(0.0));
  }
  SUBCASE("reference value at rho=0.98, rOut=sqrt(0.9)") {
    Eigen::VectorXcd k(1);
    k[0] = Complex(0.98, 0.0);
    const auto op = CouplingOperator::circulant(k, true);
    // frozen from the closed form -ln(0.98*sqrt(0.9))/0.01
    CHECK(thresholdPump(op, std::sqrt(0.9), units) ==
          doctest::Approx(7.2882965146).epsilon(1e-9));
  }
  SUBCASE("rho=0.5 at unit outcoupling") {
    Eigen::VectorXcd k(1);
    k[0] = Complex(0.5, 0.0);
    const auto op = CouplingOperator::circulant(k, true);
    CHECK(thresholdPump(op, 1.0, units) ==
          doctest::Approx(std::log(2.0) / 0.01).epsilon(1e-12));
  }
  SUBCASE("above-unity zero-pump gain has no threshold") {
    Eigen::VectorXcd k(1);
    k[0] = Complex(1.5, 0.0);
    const auto op = CouplingOperator::circulant(k, true);
    CHECK_THROWS_AS(thresholdPump(op, 1.0, units), NoThresholdError);
  }
  SUBCASE("strictly decreasing in rho and rOut") {
    double prev = 1e300;
    for (double rho : {0.5, 0.7, 0.9, 0.98}) {
      Eigen::VectorXcd k(1);
      k[0] = Complex(rho, 0.0);
      const auto op = CouplingOperator::circulant(k, true);
      const double th = thresholdPump(op, 0.9, units);
      CHECK(th < prev);
      prev = th;
    }
    Eigen::VectorXcd k(1);
    k[0] = Complex(0.9, 0.0);
    const auto op = CouplingOperator::circulant(k, true);
    prev = 1e300;
    for (double rOut : {0.5, 0.7, 0.9, 1.0}) {
      const double th = thresholdPump(op, rOut, units);
      CHECK(th < prev);
      prev = th;
    }
  }
}

TEST_CASE("power iteration fallback on a general complex matrix") {
  Rng rng(55);
  Eigen::MatrixXcd m(6, 6);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) {
      const auto [x, y] = rng.gaussianPair();
      m(r, c) = Complex(x, y) * 0.05;
    }
  // not Hermitian, not symmetric: exercises the iterative path
  const auto op = CouplingOperator::dense(m, true);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
  const double exact = es.eigenvalues().cwiseAbs().maxCoeff();
  CHECK(op.rho() == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("pixel budget reports") {
  Rng rng(2);
  const Eigen::VectorXcd kernel = randomComplex(4, rng, 0.01);
  const auto circSmall = CouplingOperator::circulant(kernel, true);

  SUBCASE("circulant capacity is the full pixel grid") {
    Eigen::VectorXcd k = Eigen::VectorXcd::Zero(1000000);
    k[0] = Complex(0.5, 0.0);
    const auto op = CouplingOperator::circulant(k);
    const BudgetReport r = validateBudget(op, {1000, 1000});
    CHECK(r.fits);
    CHECK(r.slack == 0);
  }
  SUBCASE("dense capacity is one column per OPO") {
    const GraphInstance g = makeGraph(GraphFamily::Complete, 112, {}, 3);
    const auto op = assembleQ(g, {});
    const BudgetReport r = validateBudget(op, {1000, 1000});
    CHECK(r.fits);
    CHECK(r.redundancy == 1000);

    Eigen::MatrixXcd big =
        Eigen::MatrixXcd::Identity(1001, 1001) * Complex(0.5, 0.0);
    const auto dense = CouplingOperator::dense(big);
    const BudgetReport v = validateBudget(dense, {1000, 1000});
    CHECK_FALSE(v.fits);
  }
}

TEST_CASE("dimension mismatch raises") {
  Rng rng(9);
  const Eigen::VectorXcd kernel = randomComplex(8, rng, 0.01);
  const auto op = CouplingOperator::circulant(kernel, true);
  CHECK_THROWS_AS(op.apply(randomComplex(9, rng)), DimensionError);
}
