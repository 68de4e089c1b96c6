#include "resfluor/geometry.hpp"

#include "resfluor/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace resfluor {

namespace {

constexpr double kUnitNormTolerance = 1e-12;

bool is_unit(const Vec3& v) { return std::abs(v.norm() - 1.0) <= kUnitNormTolerance; }

void require_positive_separation(double x) {
  if (!(x > 0.0)) {
    std::ostringstream msg;
    msg << "coupling requested at separation x = " << x << " (atoms must not coincide)";
    throw Error(ErrorCategory::Domain, msg.str());
  }
}

}  // namespace

AtomEnsemble::AtomEnsemble(std::vector<Vec3> positions, Vec3 dipole_direction)
    : positions_(std::move(positions)), dipole_(std::move(dipole_direction)) {
  const int n = size();
  if (n < 1 || n > kMaxAtoms) {
    std::ostringstream msg;
    msg << "ensemble size " << n << " outside [1, " << kMaxAtoms << "]";
    throw Error(ErrorCategory::Domain, msg.str());
  }
  if (!is_unit(dipole_)) {
    throw Error(ErrorCategory::Domain, "dipole direction must be a unit vector");
  }
  for (int mu = 0; mu < n; ++mu) {
    for (int nu = mu + 1; nu < n; ++nu) {
      if (!((positions_[mu] - positions_[nu]).norm() > 0.0)) {
        std::ostringstream msg;
        msg << "atoms " << mu + 1 << " and " << nu + 1 << " coincide";
        throw Error(ErrorCategory::Domain, msg.str());
      }
    }
  }
}

void AtomEnsemble::require_coplanar(const Vec3& beam_axis, double tolerance) const {
  const double reference = positions_.front().dot(beam_axis);
  for (int mu = 1; mu < size(); ++mu) {
    const double offset = positions_[mu].dot(beam_axis) - reference;
    if (std::abs(offset) > tolerance) {
      std::ostringstream msg;
      msg << "atom " << mu + 1 << " lies " << offset
          << " lambda0 off the plane transverse to the beam axis";
      throw Error(ErrorCategory::Domain, msg.str());
    }
  }
}

void DriveField::validate() const {
  if (!(omega0 >= 0.0)) throw Error(ErrorCategory::Domain, "peak Rabi frequency must be >= 0");
  if (!(fwhm > 0.0)) throw Error(ErrorCategory::Domain, "beam FWHM must be > 0");
  if (!is_unit(beam_axis)) throw Error(ErrorCategory::Domain, "beam axis must be a unit vector");
  if (!std::isfinite(detuning)) throw Error(ErrorCategory::Domain, "detuning must be finite");
}

double rabi_profile(const Vec3& position, const DriveField& drive) {
  if (drive.uniform) return drive.omega0;
  const Vec3 offset = position - drive.center;
  const Vec3 transverse = offset - offset.dot(drive.beam_axis) * drive.beam_axis;
  const double ratio = transverse.norm() / drive.fwhm;
  return drive.omega0 * std::exp(-4.0 * std::log(2.0) * ratio * ratio);
}

std::vector<double> rabi_frequencies(const AtomEnsemble& ensemble, const DriveField& drive) {
  drive.validate();
  if (!drive.uniform) ensemble.require_coplanar(drive.beam_axis);
  std::vector<double> rabi;
  rabi.reserve(ensemble.size());
  for (const auto& r : ensemble.positions()) rabi.push_back(rabi_profile(r, drive));
  return rabi;
}

double coupling_j(double alpha, double x) {
  require_positive_separation(x);
  const double c2 = std::cos(alpha) * std::cos(alpha);
  const double kx = kWavenumber * x;
  const double s = std::sin(kx);
  const double c = std::cos(kx);
  return 0.75 * ((c2 - 1.0) * c / kx + (1.0 - 3.0 * c2) * (s / (kx * kx) + c / (kx * kx * kx)));
}

double coupling_gamma(double alpha, double x) {
  require_positive_separation(x);
  const double c2 = std::cos(alpha) * std::cos(alpha);
  const double kx = kWavenumber * x;
  const double s = std::sin(kx);
  const double c = std::cos(kx);
  return 0.75 * ((1.0 - c2) * s / kx + (1.0 - 3.0 * c2) * (c / (kx * kx) - s / (kx * kx * kx)));
}

CouplingMatrices::CouplingMatrices(Eigen::MatrixXd exchange, Eigen::MatrixXd damping)
    : exchange_(std::move(exchange)), damping_(std::move(damping)) {
  const auto n = exchange_.rows();
  if (n < 1 || exchange_.cols() != n || damping_.rows() != n || damping_.cols() != n) {
    throw Error(ErrorCategory::Construction, "coupling matrices must be square and of equal size");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (exchange_(i, i) != 0.0 || damping_(i, i) != 0.0) {
      throw Error(ErrorCategory::Construction, "coupling matrices must have a zero diagonal");
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (exchange_(i, j) != exchange_(j, i) || damping_(i, j) != damping_(j, i)) {
        throw Error(ErrorCategory::Construction, "coupling matrices must be symmetric");
      }
    }
  }
  if (!exchange_.allFinite() || !damping_.allFinite()) {
    throw Error(ErrorCategory::Construction, "coupling matrices contain non-finite entries");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dissipator_matrix(),
                                                              Eigen::EigenvaluesOnly);
  const double smallest = solver.eigenvalues().minCoeff();
  if (smallest < kPsdTolerance) {
    std::ostringstream msg;
    msg << "damping matrix is not positive semidefinite (eigenvalue " << smallest << ")";
    throw Error(ErrorCategory::Construction, msg.str());
  }
}

CouplingMatrices CouplingMatrices::uniform(int atoms, double j, double gamma) {
  if (atoms < 1) throw Error(ErrorCategory::Domain, "need at least one atom");
  Eigen::MatrixXd exchange = Eigen::MatrixXd::Constant(atoms, atoms, j);
  Eigen::MatrixXd damping = Eigen::MatrixXd::Constant(atoms, atoms, gamma);
  exchange.diagonal().setZero();
  damping.diagonal().setZero();
  return CouplingMatrices(std::move(exchange), std::move(damping));
}

CouplingMatrices CouplingMatrices::zero(int atoms) { return uniform(atoms, 0.0, 0.0); }

Eigen::MatrixXd CouplingMatrices::dissipator_matrix() const {
  Eigen::MatrixXd m = damping_;
  m.diagonal().setConstant(0.5 * gamma_single());
  return m;
}

CouplingMatrices build_couplings(const AtomEnsemble& ensemble) {
  const int n = ensemble.size();
  Eigen::MatrixXd exchange = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd damping = Eigen::MatrixXd::Zero(n, n);
  const Vec3& dipole = ensemble.dipole_direction();
  for (int mu = 0; mu < n; ++mu) {
    for (int nu = mu + 1; nu < n; ++nu) {
      const Vec3 separation = ensemble.position(mu) - ensemble.position(nu);
      const double x = separation.norm();
      const double cos_alpha = std::clamp(separation.dot(dipole) / x, -1.0, 1.0);
      const double alpha = std::acos(cos_alpha);
      exchange(mu, nu) = exchange(nu, mu) = coupling_j(alpha, x);
      damping(mu, nu) = damping(nu, mu) = coupling_gamma(alpha, x);
    }
  }
  return CouplingMatrices(std::move(exchange), std::move(damping));
}

}  // namespace resfluor
