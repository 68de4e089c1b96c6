#pragma once

// Steady-state resonance-fluorescence observables: photodetection rate,
// two-time correlators via the quantum regression theorem, and the far-field
// power spectrum split into a coherent delta weight and an incoherent part.
//
// Spectral convention: omega is measured from the laser frequency and
//   S_inc(omega) = (1/pi) Re sum_{mu,nu} e^{i k r.(r_mu - r_nu)}
//                  * int_0^inf dtau e^{-i omega tau} <s+_mu(tau) s-_nu>_connected,
// so that  int S_inc + coherent_weight = steady_intensity.

#include "resfluor/liouvillian.hpp"

#include <span>
#include <vector>

namespace resfluor {

/// Far-field observation direction. The dipole radiation-pattern prefactor is fixed to 1.
class DetectorGeometry {
 public:
  explicit DetectorGeometry(Vec3 direction);
  /// Direction (cos theta, sin theta, 0) in the plane of the atoms.
  static DetectorGeometry in_plane(double theta);

  const Vec3& direction() const { return direction_; }
  /// k0 * rhat . r for an atom at `position`.
  double phase(const Vec3& position) const;

 private:
  Vec3 direction_;
};

/// One Lorentzian + dispersive term of the incoherent spectrum:
///   (1/pi) [L gamma/2 - K (omega - omega_p)] / [(gamma/2)^2 + (omega - omega_p)^2].
struct Peak {
  double omega = 0.0;
  double gamma = 0.0;
  double lorentz = 0.0;
  double dispersive = 0.0;
  bool stationary = false;  // the zero mode of the generator; excluded from sums

  double evaluate(double w) const;
};

/// Sum of all non-stationary peaks at `w`.
double reconstruct(std::span<const Peak> peaks, double w);

enum class SpectrumMethod {
  Automatic,   // eigenmodes, falling back to the time domain for defective generators
  Eigenmodes,
  TimeDomain,  // exact propagation on a tau grid and oscillatory quadrature
};

struct SpectrumResult {
  std::vector<double> grid;        // ascending, symmetric about 0
  std::vector<double> incoherent;  // S_inc on `grid`
  double coherent_weight = 0.0;    // mass of the delta at omega = 0
  std::vector<Peak> peaks;         // empty on the time-domain path
  Vec3 detector = Vec3::UnitX();
  SpectrumMethod method = SpectrumMethod::Eigenmodes;
};

/// 2m+1 points from -width to +width with exact mirror symmetry.
std::vector<double> uniform_grid(double width, int points);
/// Default window half-width: 5 * max(gamma, |Delta|, max Omega, max |J|).
double default_grid_width(const LiouvillianModel& model);
/// Uniform core on [-core, core] plus geometric tails out to +-outer. Used for
/// integrating the spectrum when Lorentzian tails matter.
std::vector<double> wide_grid(double core, int core_points, double outer, int tail_points);
/// Throws unless `grid` is ascending and every point has its mirror image.
void require_symmetric_grid(std::span<const double> grid);

/// sum_{mu nu} Tr[s+_mu s-_nu rho] e^{i k r.(r_mu - r_nu)}.
double steady_intensity(const LiouvillianModel& model, const OperatorDense& rho,
                        const DetectorGeometry& detector);
/// |sum_mu <s-_mu> e^{-i k r.r_mu}|^2.
double coherent_weight(const LiouvillianModel& model, const OperatorDense& rho,
                       const DetectorGeometry& detector);

/// Steady-state two-time correlators g_{mu nu}(tau) = <s+_mu(tau) s-_nu(0)>,
/// held either as eigenmode expansions or as samples on a tau grid.
class CorrelatorSet {
 public:
  int atoms() const { return atoms_; }
  bool has_modes() const { return rates_.size() != 0; }

  /// g_{mu nu}(tau). On the sampled form tau must be a grid point.
  Complex value(int mu, int nu, double tau) const;
  /// <s+_mu> <s-_nu>, the tau -> infinity limit.
  Complex coherent_offset(int mu, int nu) const;
  Complex connected(int mu, int nu, double tau) const {
    return value(mu, nu, tau) - coherent_offset(mu, nu);
  }
  const std::vector<double>& tau_grid() const { return taus_; }

 private:
  friend CorrelatorSet qrt_correlators(const LiouvillianModel&, const OperatorDense&);
  friend CorrelatorSet qrt_correlators(const LiouvillianModel&, const OperatorDense&,
                                       std::span<const double>, EvolutionMethod);

  int atoms_ = 0;
  CVector mean_plus_;
  CVector mean_minus_;
  // eigenmode form: g_{mu nu}(tau) = sum_p emit_(mu,p) source_(p,nu) e^{rate_p tau}
  CVector rates_;
  CMatrix emit_;
  CMatrix source_;
  // sampled form: samples_[k](mu, nu) = g_{mu nu}(taus_[k])
  std::vector<double> taus_;
  std::vector<CMatrix> samples_;
};

/// Eigenmode form. Requires a non-defective generator.
CorrelatorSet qrt_correlators(const LiouvillianModel& model, const OperatorDense& rho);
/// Sampled form on `tau_grid` using `evolve_vectorized`.
CorrelatorSet qrt_correlators(const LiouvillianModel& model, const OperatorDense& rho,
                              std::span<const double> tau_grid,
                              EvolutionMethod method = EvolutionMethod::Automatic);

/// Detector-weighted sum of connected correlators, sum_{mu nu} e^{i phi_mu - i phi_nu}
/// (g_{mu nu}(tau) - <s+_mu><s-_nu>), evaluated from the eigenmodes.
std::vector<Complex> summed_connected_correlator(const LiouvillianModel& model,
                                                 const OperatorDense& rho,
                                                 const DetectorGeometry& detector,
                                                 std::span<const double> taus);

/// Peak list of the incoherent spectrum from the eigenmodes of the generator.
/// Throws `Unsupported` on a defective generator.
std::vector<Peak> peak_decomposition(const LiouvillianModel& model, const OperatorDense& rho,
                                     const DetectorGeometry& detector);

struct SpectrumOptions {
  SpectrumMethod method = SpectrumMethod::Automatic;
  /// Time-domain path only: upper bound on the initial tau_max.
  double max_initial_tau = 4000.0;
};

SpectrumResult power_spectrum(const LiouvillianModel& model, const OperatorDense& rho,
                              const DetectorGeometry& detector, std::span<const double> grid,
                              const SpectrumOptions& options = {});
/// Convenience overload computing the steady state and the default grid.
SpectrumResult power_spectrum(const LiouvillianModel& model, const DetectorGeometry& detector,
                              int grid_points = 4001);

struct SplitSpectrum {
  std::vector<double> symmetric;
  std::vector<double> antisymmetric;
};

/// [S(w) +- S(-w)] / 2 on the spectrum's own grid.
SplitSpectrum symmetric_asymmetric_split(const SpectrumResult& spectrum);

/// Same split built from the real and imaginary parts of the summed connected
/// correlator (cosine and sine transforms), evaluated in closed form per mode.
SplitSpectrum split_from_correlator(const LiouvillianModel& model, const OperatorDense& rho,
                                    const DetectorGeometry& detector,
                                    std::span<const double> grid);

/// Complex per-pair transforms P_{mu nu}(w) = (1/pi) int_0^inf e^{-i w tau}
/// (connected g_{mu nu}(tau)) dtau, optionally including the detector phase
/// e^{i phi_mu - i phi_nu}. The physical spectrum is Re sum_{mu nu} P_{mu nu}.
struct PairSpectra {
  int atoms = 0;
  std::vector<double> grid;
  std::vector<std::vector<Complex>> terms;  // index mu * atoms + nu

  const std::vector<Complex>& at(int mu, int nu) const { return terms.at(mu * atoms + nu); }
};

PairSpectra pair_spectra(const LiouvillianModel& model, const OperatorDense& rho,
                         std::span<const double> grid, const DetectorGeometry* detector);

}  // namespace resfluor
