#include "resfluor/errors.hpp"
#include "resfluor/liouvillian.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace resfluor;

namespace {

AtomEnsemble chain(int n, double spacing = 640.0 / 780.0) {
  std::vector<Vec3> pos;
  for (int i = 0; i < n; ++i) pos.emplace_back(spacing * i, 0.0, 0.0);
  return AtomEnsemble(pos, Vec3::UnitZ());
}

DriveField uniform_drive(double omega, double delta) {
  DriveField d;
  d.omega0 = omega;
  d.detuning = delta;
  d.uniform = true;
  return d;
}

std::vector<Complex> sorted(const CVector& v) {
  std::vector<Complex> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

// Textbook single-atom steady state for H = (D/2) sz + W (s+ + s-), decay gamma = 1.
double excited_population(double omega, double delta) {
  return omega * omega / (delta * delta + 0.25 + 2.0 * omega * omega);
}

}  // namespace

TEST_CASE("operator embedding and vectorization") {
  const CMatrix sp = sigma_plus(2, 0);
  CHECK(sp(0, 2) == Complex(1.0));  // |e g><g g|
  CHECK(sp.cwiseAbs().sum() == 2.0);
  CHECK((sigma_plus(1, 0) * sigma_minus(1, 0) - sigma_minus(1, 0) * sigma_plus(1, 0) - sigma_z(1, 0)).norm() == 0.0);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  CMatrix a(4, 4), x(4, 4), b(4, 4);
  for (auto* m : {&a, &x, &b}) {
    for (Eigen::Index i = 0; i < 16; ++i) m->data()[i] = Complex(g(rng), g(rng));
  }
  CMatrix kron = CMatrix::Zero(16, 16);
  add_kron(kron, 1.0, b.transpose(), a);
  CHECK((kron * vec(x) - vec(a * x * b)).norm() < 1e-12);
  CHECK(std::abs((trace_functional(a) * vec(x))(0, 0) - (a * x).trace()) < 1e-12);
  CHECK((unvec(vec(x)) - x).norm() == 0.0);
  CHECK(std::abs((trace_functional(a.adjoint()) * vec(x))(0, 0) - (a.adjoint() * x).trace()) < 1e-12);

  CHECK_THROWS_AS(OperatorDense(2, CMatrix::Zero(3, 3)), Error);
  CHECK_THROWS_AS(OperatorDense::hermitian(1, sigma_plus(1, 0)), Error);
}

TEST_CASE("single-atom Hamiltonian") {
  const auto h = build_hamiltonian(CouplingMatrices::zero(1), std::vector<double>{0.1}, 1.0);
  CMatrix expected(2, 2);
  expected << 0.5, 0.1, 0.1, -0.5;
  CHECK((h.matrix() - expected).norm() < 1e-15);
  CHECK(h.is_hermitian());
}

TEST_CASE("bare two-atom Hamiltonian is diagonal") {
  const auto h = build_hamiltonian(CouplingMatrices::zero(2), std::vector<double>{0.0, 0.0}, 0.7);
  CMatrix expected = CMatrix::Zero(4, 4);
  expected.diagonal() << 0.7, 0.0, 0.0, -0.7;
  CHECK((h.matrix() - expected).norm() < 1e-15);
}

TEST_CASE("exchange splits the single-excitation block by +-J") {
  for (double j : {-0.0855, 0.031, 0.4}) {
    const auto h = build_hamiltonian(CouplingMatrices::uniform(2, j, 0.0), std::vector<double>{0.0, 0.0}, 0.0);
    // Block spanned by |eg> (index 1) and |ge> (index 2).
    Eigen::Matrix2cd block;
    block << h.matrix()(1, 1), h.matrix()(1, 2), h.matrix()(2, 1), h.matrix()(2, 2);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-std::abs(j)).epsilon(1e-14));
    CHECK(es.eigenvalues()(1) == doctest::Approx(std::abs(j)).epsilon(1e-14));
  }
}

TEST_CASE("undriven single atom: generator spectrum") {
  const auto model = build_liouvillian(chain(1), uniform_drive(0.0, 0.0), CouplingMatrices::zero(1));
  const auto ev = sorted(model.decomposition().eigenvalues);
  CHECK(std::abs(ev[0] - Complex(-1.0)) < 1e-12);
  CHECK(std::abs(ev[1] - Complex(-0.5)) < 1e-12);
  CHECK(std::abs(ev[2] - Complex(-0.5)) < 1e-12);
  CHECK(std::abs(ev[3]) < 1e-12);
  CHECK(model.decomposition().null_count == 1);
}

TEST_CASE("generator invariants on geometric models") {
  const AtomEnsemble ensembles[] = {chain(1), chain(2), chain(3), chain(3, 0.3)};
  for (const auto& ens : ensembles) {
    DriveField drive = uniform_drive(0.3, 1.0);
    drive.uniform = false;
    drive.fwhm = 0.8;
    const auto model = build_liouvillian(ens, drive, build_couplings(ens));
    CHECK(max_trace_violation(model, 100, 5u) < 1e-10);
    const auto& dec = model.decomposition();
    CHECK(dec.null_count == 1);
    CHECK_FALSE(dec.defective);
    const double scale = dec.eigenvalues.cwiseAbs().maxCoeff();
    for (Eigen::Index p = 0; p < dec.size(); ++p) {
      if (p != dec.stationary) CHECK(dec.eigenvalues(p).real() <= 1e-10 * scale);
      double closest = 1e300;
      for (Eigen::Index q = 0; q < dec.size(); ++q) {
        closest = std::min(closest, std::abs(dec.eigenvalues(q) - std::conj(dec.eigenvalues(p))));
      }
      CHECK(closest < 1e-8);
    }
    const CMatrix bio = dec.left * dec.right - CMatrix::Identity(dec.size(), dec.size());
    CHECK(bio.cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("independent atoms: generator is a tensor sum") {
  const auto one = build_liouvillian(chain(1), uniform_drive(0.4, 0.6), CouplingMatrices::zero(1));
  ModelOptions uniform;
  uniform.uniform_couplings = std::make_pair(0.0, 0.0);
  const auto two = build_liouvillian(chain(2), uniform_drive(0.4, 0.6), build_couplings(chain(2)), uniform);
  const auto& l1 = one.decomposition().eigenvalues;
  std::vector<Complex> sums;
  for (Eigen::Index a = 0; a < 4; ++a) {
    for (Eigen::Index b = 0; b < 4; ++b) sums.push_back(l1(a) + l1(b));
  }
  std::sort(sums.begin(), sums.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  const auto got = sorted(two.decomposition().eigenvalues);
  for (std::size_t i = 0; i < sums.size(); ++i) {
    double closest = 1e300;
    for (const auto& g : got) closest = std::min(closest, std::abs(g - sums[i]));
    CHECK(closest < 1e-9);
  }

  // Acting on a product operator the generator obeys the Leibniz rule.
  const auto rho1 = steady_state(one).rho.matrix();
  CMatrix x(2, 2);
  x << 0.3, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.7;
  Eigen::MatrixXcd product(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) product(2 * i + k, 2 * j + l) = rho1(i, j) * x(k, l);
  const CMatrix lx = one.apply(x);
  CMatrix expected(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) expected(2 * i + k, 2 * j + l) = rho1(i, j) * lx(k, l);
  // L1(rho1) = 0, so L(rho1 x X) = rho1 x L1(X).
  CHECK((two.apply(product) - expected).norm() < 1e-12);
}

TEST_CASE("steady state: closed-form single atom") {
  const auto model = build_liouvillian(chain(1), uniform_drive(0.1, 1.0), CouplingMatrices::zero(1));
  const auto ss = steady_state(model);
  const CMatrix& rho = ss.rho.matrix();
  CHECK(rho(0, 0).real() == doctest::Approx(excited_population(0.1, 1.0)).epsilon(1e-12));
  CHECK(rho(0, 0).real() == doctest::Approx(7.874e-3).epsilon(1e-3));
  CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
  CHECK(ss.rho.is_hermitian(1e-10));
  CHECK(ss.residual < 1e-8);

  for (double omega : {0.5, 3.0}) {
    for (double delta : {0.0, -2.0}) {
      const auto m = build_liouvillian(chain(1), uniform_drive(omega, delta), CouplingMatrices::zero(1));
      CHECK(steady_state(m).rho.matrix()(0, 0).real() ==
            doctest::Approx(excited_population(omega, delta)).epsilon(1e-10));
    }
  }

  const auto dark = build_liouvillian(chain(1), uniform_drive(0.0, 0.3), CouplingMatrices::zero(1));
  const CMatrix g = steady_state(dark).rho.matrix();
  CHECK(std::abs(g(1, 1) - 1.0) < 1e-12);
  CHECK(g.cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("steady state of independent atoms factorizes") {
  ModelOptions off;
  off.zero_collective = true;
  const auto two = build_liouvillian(chain(2), uniform_drive(0.3, 0.5), build_couplings(chain(2)), off);
  const auto one = build_liouvillian(chain(1), uniform_drive(0.3, 0.5), CouplingMatrices::zero(1));
  const CMatrix r1 = steady_state(one).rho.matrix();
  const CMatrix r2 = steady_state(two).rho.matrix();
  CMatrix product(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) product(2 * i + k, 2 * j + l) = r1(i, j) * r1(k, l);
  // Fidelity of two states via sqrt(sqrt(a) b sqrt(a)).
  const Eigen::SelfAdjointEigenSolver<CMatrix> ea(product);
  const CMatrix sa = ea.operatorSqrt();
  const Eigen::SelfAdjointEigenSolver<CMatrix> em(sa * r2 * sa);
  double fidelity = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i) fidelity += std::sqrt(std::max(0.0, em.eigenvalues()(i)));
  CHECK(fidelity * fidelity > 1.0 - 1e-9);
  CHECK((product - r2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("a decoupled dark state makes the steady state non-unique") {
  // Gamma = gamma/2 makes the antisymmetric single excitation dark, and equal drive never reaches it.
  ModelOptions opt;
  opt.uniform_couplings = std::make_pair(0.0, 0.5);
  const auto model = build_liouvillian(chain(2), uniform_drive(0.2, 0.0), build_couplings(chain(2)), opt);
  try {
    steady_state(model);
    FAIL("expected non-unique steady state");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::Numerical);
    CHECK(std::string(e.what()).find("non-unique steady state") != std::string::npos);
  }
}

TEST_CASE("exchange without collective damping is a valid generator") {
  ModelOptions opt;
  opt.uniform_couplings = std::make_pair(-0.2, 0.0);
  const auto model = build_liouvillian(chain(3), uniform_drive(0.2, 1.0), build_couplings(chain(3)), opt);
  CHECK(max_trace_violation(model, 20, 1u) < 1e-10);
  CHECK(steady_state(model).residual < 1e-8);
}

TEST_CASE("evolution") {
  const auto model = build_liouvillian(chain(1), uniform_drive(0.0, 0.7), CouplingMatrices::zero(1));
  CMatrix eg = CMatrix::Zero(2, 2);
  eg(0, 1) = 1.0;
  const std::vector<double> taus = {0.0, 0.1, 0.5, 1.0, 3.0, 7.5};
  for (auto method : {EvolutionMethod::Eigenmodes, EvolutionMethod::Propagator}) {
    const auto out = evolve_vectorized(model, vec(eg), taus, method);
    CHECK(out.front() == vec(eg));
    for (std::size_t k = 0; k < taus.size(); ++k) {
      const Complex expected = std::exp(-Complex(0.5, 0.7) * taus[k]);
      CHECK(std::abs(unvec(out[k])(0, 1) - expected) < 1e-10);
    }
  }

  const auto driven = build_liouvillian(chain(2), uniform_drive(0.5, 1.0), build_couplings(chain(2)));
  const CVector ss = vec(steady_state(driven).rho.matrix());
  const std::vector<double> grid = {0.0, 1.0, 2.0, 10.0, 40.0};
  for (const auto& v : evolve_vectorized(driven, ss, grid)) CHECK((v - ss).norm() < 1e-9);

  CMatrix h(4, 4);
  h << 1, Complex(0.2, 0.1), 0, 0.3, Complex(0.2, -0.1), 0, 0.1, 0, 0, 0.1, 2, Complex(0, 1), 0.3, 0,
      Complex(0, -1), -1;
  const auto eig = evolve_vectorized(driven, vec(h), grid, EvolutionMethod::Eigenmodes);
  const auto prop = evolve_vectorized(driven, vec(h), grid, EvolutionMethod::Propagator);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const CMatrix m = unvec(eig[k]);
    CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((eig[k] - prop[k]).cwiseAbs().maxCoeff() < 1e-9);
  }

  CHECK_THROWS_AS(evolve_vectorized(driven, ss, std::vector<double>{0.5, 1.0}), Error);
  CHECK_THROWS_AS(evolve_vectorized(driven, ss, std::vector<double>{0.0, 2.0, 1.0}), Error);
}

TEST_CASE("model switches") {
  const auto ens = chain(2);
  DriveField drive = uniform_drive(0.1, 1.0);
  drive.uniform = false;
  drive.fwhm = 600.0 / 780.0;
  const auto full = build_liouvillian(ens, drive, build_couplings(ens));
  CHECK(full.rabi()[0] == 0.1);
  CHECK(full.rabi()[1] == doctest::Approx(4.265e-3).epsilon(1e-3));

  ModelOptions opt;
  opt.zero_collective = true;
  const auto off = build_liouvillian(ens, drive, build_couplings(ens), opt);
  CHECK(off.couplings().exchange().norm() == 0.0);
  CHECK(off.couplings().damping().norm() == 0.0);

  opt = {};
  opt.rabi_override = std::vector<double>{0.2, 0.3};
  CHECK(build_liouvillian(ens, drive, build_couplings(ens), opt).rabi() == std::vector<double>{0.2, 0.3});
  opt.rabi_override = std::vector<double>{0.2};
  CHECK_THROWS_AS(build_liouvillian(ens, drive, build_couplings(ens), opt), Error);

  CHECK_THROWS_AS(build_liouvillian(chain(3), drive, build_couplings(ens)), Error);
  opt = {};
  opt.uniform_couplings = std::make_pair(0.0, 0.9);
  CHECK_THROWS_AS(build_liouvillian(ens, drive, build_couplings(ens), opt), Error);
}
