#include "resfluor/liouvillian.hpp"

#include "resfluor/errors.hpp"

#include <lapacke.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>

namespace resfluor {

namespace {

// Below this reciprocal condition number the bordered steady-state system is
// singular, i.e. the stationary subspace is more than one-dimensional.
constexpr double kBorderedRcond = 1e-12;
constexpr double kSteadyResidual = 1e-8;

CMatrix assemble_generator(const CMatrix& h, const CouplingMatrices& couplings) {
  const int atoms = couplings.size();
  const Eigen::Index dim = h.rows();
  const CMatrix id = CMatrix::Identity(dim, dim);
  const Complex i1(0.0, 1.0);

  CMatrix gen = CMatrix::Zero(dim * dim, dim * dim);
  // -i[H, rho]
  add_kron(gen, -i1, id, h);
  add_kron(gen, i1, h.transpose(), id);

  // sum_{mu,nu} G_{mu nu} (2 s-_nu rho s+_mu - s+_mu s-_nu rho - rho s+_mu s-_nu)
  const Eigen::MatrixXd g = couplings.dissipator_matrix();
  std::vector<CMatrix> plus, minus;
  for (int mu = 0; mu < atoms; ++mu) {
    plus.push_back(sigma_plus(atoms, mu));
    minus.push_back(sigma_minus(atoms, mu));
  }
  for (int mu = 0; mu < atoms; ++mu) {
    for (int nu = 0; nu < atoms; ++nu) {
      const double rate = g(mu, nu);
      if (rate == 0.0) continue;
      const CMatrix jump = plus[mu] * minus[nu];
      add_kron(gen, 2.0 * rate, plus[mu].transpose(), minus[nu]);
      add_kron(gen, -rate, id, jump);
      add_kron(gen, -rate, jump.transpose(), id);
    }
  }
  return gen;
}

SpectralDecomposition decompose(const CMatrix& generator) {
  const Eigen::Index n = generator.rows();
  CMatrix work = generator;
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.right.resize(n, n);
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', 'V', static_cast<lapack_int>(n),
      reinterpret_cast<lapack_complex_double*>(work.data()), static_cast<lapack_int>(n),
      reinterpret_cast<lapack_complex_double*>(out.eigenvalues.data()), nullptr,
      static_cast<lapack_int>(n), reinterpret_cast<lapack_complex_double*>(out.right.data()),
      static_cast<lapack_int>(n));
  if (info != 0) {
    std::ostringstream msg;
    msg << "eigensolver failed (zgeev info = " << info << ")";
    throw Error(ErrorCategory::Numerical, msg.str());
  }

  const Eigen::PartialPivLU<CMatrix> lu(out.right);
  out.left = lu.inverse();
  const double norm_right = out.right.cwiseAbs().colwise().sum().maxCoeff();
  const double norm_left = out.left.cwiseAbs().colwise().sum().maxCoeff();
  out.condition = norm_right * norm_left;
  if (!std::isfinite(out.condition)) out.condition = std::numeric_limits<double>::infinity();
  out.defective = !(out.condition <= kDefectiveCondition);

  const double scale = out.eigenvalues.cwiseAbs().maxCoeff();
  out.eigenvalues.cwiseAbs().minCoeff(&out.stationary);
  out.null_count = 0;
  for (Eigen::Index p = 0; p < n; ++p) {
    if (std::abs(out.eigenvalues(p)) < kNullTolerance * scale) ++out.null_count;
  }
  return out;
}

}  // namespace

double SpectralDecomposition::slowest_rate() const {
  double slowest = std::numeric_limits<double>::infinity();
  for (Eigen::Index p = 0; p < size(); ++p) {
    if (p == stationary) continue;
    const double rate = std::abs(eigenvalues(p).real());
    if (rate > 0.0) slowest = std::min(slowest, rate);
  }
  return slowest;
}

double SpectralDecomposition::fastest_frequency() const {
  return eigenvalues.imag().cwiseAbs().maxCoeff();
}

struct LiouvillianModel::Cache {
  std::once_flag once;
  std::optional<SpectralDecomposition> decomposition;
};

LiouvillianModel::LiouvillianModel(AtomEnsemble ensemble, CouplingMatrices couplings,
                                   std::vector<double> rabi, double detuning)
    : ensemble_(std::move(ensemble)),
      couplings_(std::move(couplings)),
      rabi_(std::move(rabi)),
      detuning_(detuning),
      hamiltonian_(build_hamiltonian(couplings_, rabi_, detuning_)),
      cache_(std::make_shared<Cache>()) {
  if (couplings_.size() != ensemble_.size()) {
    throw Error(ErrorCategory::Construction, "coupling matrices do not match the ensemble size");
  }
  generator_ = assemble_generator(hamiltonian_.matrix(), couplings_);
}

const SpectralDecomposition& LiouvillianModel::decomposition() const {
  std::call_once(cache_->once, [this] { cache_->decomposition = decompose(generator_); });
  return *cache_->decomposition;
}

CMatrix LiouvillianModel::apply(const CMatrix& rho) const {
  return unvec(generator_ * vec(rho));
}

OperatorDense build_hamiltonian(const CouplingMatrices& couplings, std::span<const double> rabi,
                                double detuning) {
  const int atoms = couplings.size();
  if (static_cast<int>(rabi.size()) != atoms) {
    std::ostringstream msg;
    msg << "got " << rabi.size() << " Rabi frequencies for " << atoms << " atoms";
    throw Error(ErrorCategory::Construction, msg.str());
  }
  const Eigen::Index dim = hilbert_dim(atoms);
  CMatrix h = CMatrix::Zero(dim, dim);
  std::vector<CMatrix> plus, minus;
  for (int mu = 0; mu < atoms; ++mu) {
    plus.push_back(sigma_plus(atoms, mu));
    minus.push_back(sigma_minus(atoms, mu));
    h += 0.5 * detuning * sigma_z(atoms, mu);
    h += rabi[mu] * (plus[mu] + minus[mu]);
  }
  const Eigen::MatrixXd& j = couplings.exchange();
  for (int mu = 0; mu < atoms; ++mu) {
    for (int nu = 0; nu < atoms; ++nu) {
      if (mu == nu || j(mu, nu) == 0.0) continue;
      h += 0.5 * j(mu, nu) * (plus[mu] * minus[nu] + plus[nu] * minus[mu]);
    }
  }
  return OperatorDense::hermitian(atoms, std::move(h));
}

OperatorDense build_hamiltonian(const AtomEnsemble& ensemble, const DriveField& drive,
                                const CouplingMatrices& couplings) {
  if (couplings.size() != ensemble.size()) {
    throw Error(ErrorCategory::Construction, "coupling matrices do not match the ensemble size");
  }
  const auto rabi = rabi_frequencies(ensemble, drive);
  return build_hamiltonian(couplings, rabi, drive.detuning);
}

LiouvillianModel build_liouvillian(const AtomEnsemble& ensemble, const DriveField& drive,
                                   const CouplingMatrices& couplings,
                                   const ModelOptions& options) {
  const int atoms = ensemble.size();
  drive.validate();
  std::vector<double> rabi;
  if (options.rabi_override) {
    rabi = *options.rabi_override;
    if (static_cast<int>(rabi.size()) != atoms) {
      throw Error(ErrorCategory::Construction, "Rabi override list does not match the atom count");
    }
    for (double omega : rabi) {
      if (!(omega >= 0.0)) throw Error(ErrorCategory::Domain, "Rabi frequencies must be >= 0");
    }
  } else {
    rabi = rabi_frequencies(ensemble, drive);
  }

  if (options.zero_collective) {
    return LiouvillianModel(ensemble, CouplingMatrices::zero(atoms), std::move(rabi),
                            drive.detuning);
  }
  if (options.uniform_couplings) {
    const auto [j, gamma] = *options.uniform_couplings;
    return LiouvillianModel(ensemble, CouplingMatrices::uniform(atoms, j, gamma),
                            std::move(rabi), drive.detuning);
  }
  return LiouvillianModel(ensemble, couplings, std::move(rabi), drive.detuning);
}

SteadyState steady_state(const LiouvillianModel& model) {
  const CMatrix& gen = model.generator();
  const Eigen::Index dim = model.hilbert_dim();
  const Eigen::Index n = gen.rows();

  // Replace the rho(0,0) equation by the trace condition. The diagonal rows of
  // L sum to zero, so this row is redundant and the bordered system is regular
  // exactly when the kernel of L is one-dimensional.
  CMatrix bordered = gen;
  bordered.row(0).setZero();
  for (Eigen::Index i = 0; i < dim; ++i) bordered(0, i * dim + i) = 1.0;
  CVector rhs = CVector::Zero(n);
  rhs(0) = 1.0;

  const Eigen::PartialPivLU<CMatrix> lu(bordered);
  const double rcond = lu.rcond();
  if (!(rcond > kBorderedRcond)) {
    std::ostringstream msg;
    msg << "non-unique steady state (bordered system rcond = " << rcond << ")";
    throw Error(ErrorCategory::Numerical, msg.str());
  }
  CVector x = lu.solve(rhs);
  x += lu.solve(rhs - bordered * x);

  CMatrix rho = unvec(x);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace();

  const double residual = (gen * vec(rho)).cwiseAbs().maxCoeff();
  if (!(residual <= kSteadyResidual)) {
    std::ostringstream msg;
    msg << "steady-state residual " << residual << " exceeds " << kSteadyResidual;
    throw Error(ErrorCategory::Numerical, msg.str());
  }
  const Eigen::SelfAdjointEigenSolver<CMatrix> spectrum(rho, Eigen::EigenvaluesOnly);
  if (spectrum.eigenvalues().minCoeff() < -1e-8) {
    throw Error(ErrorCategory::Numerical, "steady state is not positive semidefinite");
  }
  return SteadyState{OperatorDense(model.atoms(), std::move(rho)), residual};
}

const SpectralDecomposition& spectral_decomposition(const LiouvillianModel& model) {
  return model.decomposition();
}

CMatrix propagator(const LiouvillianModel& model, double step) {
  if (!(step >= 0.0)) throw Error(ErrorCategory::Domain, "propagation step must be >= 0");
  const CMatrix scaled = model.generator() * step;
  return scaled.exp();
}

std::vector<CVector> evolve_vectorized(const LiouvillianModel& model, const CVector& v0,
                                       std::span<const double> tau_grid,
                                       EvolutionMethod method) {
  if (v0.size() != model.generator().rows()) {
    throw Error(ErrorCategory::Domain, "initial vector has the wrong length");
  }
  if (tau_grid.empty() || tau_grid.front() != 0.0) {
    throw Error(ErrorCategory::Domain, "time grid must start at 0");
  }
  for (std::size_t k = 1; k < tau_grid.size(); ++k) {
    if (!(tau_grid[k] > tau_grid[k - 1])) {
      throw Error(ErrorCategory::Domain, "time grid must be strictly ascending");
    }
  }

  if (method == EvolutionMethod::Automatic) {
    method = model.decomposition().defective ? EvolutionMethod::Propagator
                                             : EvolutionMethod::Eigenmodes;
  }

  std::vector<CVector> out;
  out.reserve(tau_grid.size());
  out.push_back(v0);

  if (method == EvolutionMethod::Eigenmodes) {
    const auto& dec = model.decomposition();
    if (dec.defective) {
      throw Error(ErrorCategory::Unsupported, "eigenmode evolution on a defective generator");
    }
    const CVector amplitudes = dec.left * v0;
    for (std::size_t k = 1; k < tau_grid.size(); ++k) {
      const CVector factors = (dec.eigenvalues * tau_grid[k]).array().exp();
      out.push_back(dec.right * amplitudes.cwiseProduct(factors));
    }
    return out;
  }

  // Exact propagators, one per distinct step length.
  std::vector<std::pair<double, CMatrix>> steps;
  for (std::size_t k = 1; k < tau_grid.size(); ++k) {
    const double h = tau_grid[k] - tau_grid[k - 1];
    auto it = std::find_if(steps.begin(), steps.end(), [h](const auto& entry) {
      return std::abs(entry.first - h) <= 1e-13 * std::max(1.0, h);
    });
    if (it == steps.end()) {
      steps.emplace_back(h, propagator(model, h));
      it = std::prev(steps.end());
    }
    out.push_back(it->second * out.back());
  }
  for (const auto& v : out) {
    if (!v.allFinite()) throw Error(ErrorCategory::Numerical, "time evolution diverged");
  }
  return out;
}

double max_trace_violation(const LiouvillianModel& model, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index dim = model.hilbert_dim();
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    CMatrix a(dim, dim);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = Complex(normal(rng), normal(rng));
    const CMatrix rho = a + a.adjoint();
    worst = std::max(worst, std::abs(model.apply(rho).trace()));
  }
  return worst;
}

}  // namespace resfluor
