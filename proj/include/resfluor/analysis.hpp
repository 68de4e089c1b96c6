#pragma once

// Spectral asymmetry metrics and peak-balance diagnostics.

#include "resfluor/spectrum.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace resfluor {

struct AsymmetryReport {
  double degree = 0.0;        // D = max_{w>0} |S(w) - S(-w)| / S_max
  double s_max = 0.0;         // largest value of the incoherent spectrum
  double argmax_omega = 0.0;  // w > 0 where the difference peaks (smallest w on ties)
  std::vector<std::pair<double, double>> profile;  // (w, |S(w) - S(-w)|) for w > 0
};

/// Degree of asymmetry of the incoherent spectrum on its own grid.
/// Throws `Domain` when the spectrum has no positive maximum.
AsymmetryReport degree_of_asymmetry(const SpectrumResult& spectrum);

/// Two mirror-image peaks (omega, gamma) and (-omega, gamma) with their summed weights.
struct SisterPair {
  double omega = 0.0;  // > 0
  double gamma = 0.0;
  Complex weight_right;  // L + iK of the peak at +omega
  Complex weight_left;   // L + iK of the peak at -omega
  double residual = 0.0;  // |(L_a + i K_a) - (L_b - i K_b)|
};

/// Populations and rates between the dressed states of one strongly driven atom.
struct DressedBalance {
  double rho_plus = 0.0;
  double rho_minus = 0.0;
  double rate_plus_minus = 0.0;  // P(+ -> -)
  double rate_minus_plus = 0.0;  // P(- -> +)
  double flux = 0.0;             // rho_plus * P(+ -> -)
  double residual = 0.0;         // |rho_++ P(+->-) - rho_-- P(-->+)|
  double splitting = 0.0;        // energy difference of the dressed states
  std::vector<Peak> side_peaks;  // the two peaks nearest +-splitting
  double max_dispersive_ratio = 0.0;  // max |K_p| / |L_p| over the side peaks
};

struct BalanceReport {
  std::vector<SisterPair> pairs;
  double max_residual = 0.0;
  double max_lorentz = 0.0;  // max |L| over peak clusters, the scale for residuals
  std::optional<DressedBalance> dressed;
  double detailed_balance_residual = 0.0;
};

/// Pairs every non-central peak with its mirror image. Degenerate modes are
/// merged first since only their summed weight is basis independent.
/// Throws `Numerical` if a weighted non-central peak has no partner.
BalanceReport sister_peak_balance(std::span<const Peak> peaks);

/// Dressed-state detailed balance for a single atom with Omega >= 10 gamma, Delta = 0.
BalanceReport dressed_detailed_balance(double omega, double delta = 0.0);

}  // namespace resfluor
