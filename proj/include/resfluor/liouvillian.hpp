#pragma once

// Master-equation generator for N driven two-level atoms with dipole-dipole
// exchange and collective damping, its steady state, and its eigenmodes.

#include "resfluor/geometry.hpp"
#include "resfluor/operators.hpp"

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace resfluor {

/// Counterfactual switches applied on top of the geometric couplings.
struct ModelOptions {
  /// Drop both J and Gamma.
  bool zero_collective = false;
  /// Replace every pair coupling by the same (J, Gamma).
  std::optional<std::pair<double, double>> uniform_couplings;
  /// Per-atom Rabi frequencies that bypass the beam profile.
  std::optional<std::vector<double>> rabi_override;
};

/// Eigenvalues below this fraction of the largest |lambda| count as zero.
inline constexpr double kNullTolerance = 1e-9;
/// Eigenvector-matrix condition number above which the basis is treated as defective.
inline constexpr double kDefectiveCondition = 1e8;

/// Full eigendecomposition L = R diag(lambda) R^{-1}.
struct SpectralDecomposition {
  CVector eigenvalues;
  CMatrix right;   // columns are right eigenvectors (unit 2-norm)
  CMatrix left;    // rows form the dual basis: left * right = 1
  double condition = 0.0;  // 1-norm condition number of `right`
  bool defective = false;
  Eigen::Index stationary = 0;  // index of the eigenvalue closest to zero
  int null_count = 0;           // eigenvalues with |lambda| < kNullTolerance * max|lambda|

  Eigen::Index size() const { return eigenvalues.size(); }
  /// Smallest nonzero decay rate |Re lambda| among non-stationary modes.
  double slowest_rate() const;
  /// Largest |Im lambda|.
  double fastest_frequency() const;
};

class LiouvillianModel {
 public:
  LiouvillianModel(AtomEnsemble ensemble, CouplingMatrices couplings, std::vector<double> rabi,
                   double detuning);

  int atoms() const { return ensemble_.size(); }
  Eigen::Index hilbert_dim() const { return hamiltonian_.dim(); }
  const AtomEnsemble& ensemble() const { return ensemble_; }
  const CouplingMatrices& couplings() const { return couplings_; }
  const std::vector<double>& rabi() const { return rabi_; }
  double detuning() const { return detuning_; }
  const OperatorDense& hamiltonian() const { return hamiltonian_; }
  /// Generator acting on column-stacked density matrices (dimension 4^N).
  const CMatrix& generator() const { return generator_; }

  /// Computed on first use and shared by copies of this model.
  const SpectralDecomposition& decomposition() const;

  /// L(rho) evaluated on an operator.
  CMatrix apply(const CMatrix& rho) const;

 private:
  struct Cache;

  AtomEnsemble ensemble_;
  CouplingMatrices couplings_;
  std::vector<double> rabi_;
  double detuning_;
  OperatorDense hamiltonian_;
  CMatrix generator_;
  std::shared_ptr<Cache> cache_;
};

/// H = (Delta/2) sum sz + sum Omega_mu (s+ + s-) + sum_{mu != nu} (J/2)(s+_mu s-_nu + h.c.)
OperatorDense build_hamiltonian(const CouplingMatrices& couplings, std::span<const double> rabi,
                                double detuning);
OperatorDense build_hamiltonian(const AtomEnsemble& ensemble, const DriveField& drive,
                                const CouplingMatrices& couplings);

LiouvillianModel build_liouvillian(const AtomEnsemble& ensemble, const DriveField& drive,
                                   const CouplingMatrices& couplings,
                                   const ModelOptions& options = {});

struct SteadyState {
  OperatorDense rho;
  double residual = 0.0;  // max |L(rho)|
};

/// Unique stationary density matrix. Throws if the kernel of L is not
/// one-dimensional or the solution fails its residual check.
SteadyState steady_state(const LiouvillianModel& model);

const SpectralDecomposition& spectral_decomposition(const LiouvillianModel& model);

enum class EvolutionMethod {
  Automatic,    // eigenmodes unless the decomposition is defective
  Eigenmodes,
  Propagator,   // exact matrix exponential per distinct step
};

/// exp(L tau) v0 on an ascending grid starting at 0. The first entry is v0.
std::vector<CVector> evolve_vectorized(const LiouvillianModel& model, const CVector& v0,
                                       std::span<const double> tau_grid,
                                       EvolutionMethod method = EvolutionMethod::Automatic);

/// exp(L * step) as a dense matrix.
CMatrix propagator(const LiouvillianModel& model, double step);

/// max |Tr L(rho)| over `samples` random Hermitian rho drawn with `seed`.
double max_trace_violation(const LiouvillianModel& model, int samples, unsigned seed);

}  // namespace resfluor
