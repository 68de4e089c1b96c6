#pragma once

// Atomic geometry, the driving beam, and the photon-mediated couplings.
//
// Units throughout: lengths in the atomic transition wavelength lambda0,
// frequencies and rates in the single-atom decay rate gamma (hbar = 1).

#include <Eigen/Dense>

#include <vector>

namespace resfluor {

using Vec3 = Eigen::Vector3d;

inline constexpr int kMaxAtoms = 6;
inline constexpr double kPi = 3.14159265358979323846;
/// Wavenumber of the transition in units of 1/lambda0.
inline constexpr double kWavenumber = 2.0 * kPi;

/// N identical two-level atoms at fixed positions sharing one dipole orientation.
class AtomEnsemble {
 public:
  AtomEnsemble(std::vector<Vec3> positions, Vec3 dipole_direction);

  int size() const { return static_cast<int>(positions_.size()); }
  const std::vector<Vec3>& positions() const { return positions_; }
  const Vec3& position(int atom) const { return positions_.at(atom); }
  const Vec3& dipole_direction() const { return dipole_; }

  /// Throws if the atoms do not share a plane perpendicular to `beam_axis`.
  void require_coplanar(const Vec3& beam_axis, double tolerance = 1e-9) const;

 private:
  std::vector<Vec3> positions_;
  Vec3 dipole_;
};

/// Gaussian driving beam travelling along `beam_axis`.
struct DriveField {
  double omega0 = 0.0;          // peak Rabi frequency
  double fwhm = 1.0;            // full width at half maximum of the Rabi profile
  Vec3 center = Vec3::Zero();
  double detuning = 0.0;        // atomic minus laser frequency
  Vec3 beam_axis = Vec3::UnitZ();
  bool uniform = false;         // broad-beam limit: every atom sees omega0

  /// Throws on negative amplitude, non-positive width or a non-unit axis.
  void validate() const;
};

/// Rabi frequency at `position`; the coordinate along the beam axis is ignored.
double rabi_profile(const Vec3& position, const DriveField& drive);

/// Per-atom Rabi frequencies. Requires the ensemble to be coplanar with the
/// beam's transverse plane unless the drive is uniform.
std::vector<double> rabi_frequencies(const AtomEnsemble& ensemble, const DriveField& drive);

/// Coherent dipole-dipole exchange J(alpha, x) for a pair at separation x with
/// angle alpha between the separation vector and the dipole moment.
double coupling_j(double alpha, double x);

/// Collective damping rate Gamma(alpha, x) for the same pair.
double coupling_gamma(double alpha, double x);

/// Pairwise couplings. Both matrices are symmetric with a zero diagonal. The
/// damping matrix (gamma/2 on the diagonal, Gamma off it) must be positive
/// semidefinite, otherwise the master equation is not of Lindblad form.
class CouplingMatrices {
 public:
  CouplingMatrices(Eigen::MatrixXd exchange, Eigen::MatrixXd damping);

  /// Every off-diagonal exchange equal to `j`, every cross damping equal to `gamma`.
  static CouplingMatrices uniform(int atoms, double j, double gamma);
  static CouplingMatrices zero(int atoms);

  int size() const { return static_cast<int>(exchange_.rows()); }
  const Eigen::MatrixXd& exchange() const { return exchange_; }
  const Eigen::MatrixXd& damping() const { return damping_; }
  double gamma_single() const { return 1.0; }
  /// Lindblad coefficient matrix: gamma/2 on the diagonal, Gamma off it.
  Eigen::MatrixXd dissipator_matrix() const;

 private:
  Eigen::MatrixXd exchange_;
  Eigen::MatrixXd damping_;
};

/// Threshold below which an eigenvalue of the dissipator matrix counts as negative.
inline constexpr double kPsdTolerance = -1e-10;

CouplingMatrices build_couplings(const AtomEnsemble& ensemble);

}  // namespace resfluor
