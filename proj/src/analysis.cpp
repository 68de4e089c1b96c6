#include "resfluor/analysis.hpp"

#include "resfluor/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace resfluor {

namespace {

constexpr double kPairTolerance = 1e-6;
// Unpaired clusters lighter than this fraction of max |L| are numerical dust.
constexpr double kNegligibleWeight = 1e-10;

struct Cluster {
  double omega = 0.0;
  double gamma = 0.0;
  Complex weight;  // sum of L + iK
  int members = 0;
};

// Merge peaks whose (omega, gamma) agree within `tol`; union-find over all pairs.
std::vector<Cluster> cluster_peaks(std::span<const Peak> peaks, double tol) {
  std::vector<std::size_t> active;
  for (std::size_t p = 0; p < peaks.size(); ++p) {
    if (!peaks[p].stationary) active.push_back(p);
  }
  std::vector<std::size_t> parent(active.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (std::size_t b = a + 1; b < active.size(); ++b) {
      const Peak& pa = peaks[active[a]];
      const Peak& pb = peaks[active[b]];
      if (std::abs(pa.omega - pb.omega) <= tol && std::abs(pa.gamma - pb.gamma) <= tol) {
        parent[find(a)] = find(b);
      }
    }
  }
  std::vector<Cluster> clusters;
  std::vector<int> index(active.size(), -1);
  for (std::size_t a = 0; a < active.size(); ++a) {
    const std::size_t root = find(a);
    if (index[root] < 0) {
      index[root] = static_cast<int>(clusters.size());
      clusters.push_back({});
    }
    Cluster& c = clusters[index[root]];
    const Peak& p = peaks[active[a]];
    c.omega += p.omega;
    c.gamma += p.gamma;
    c.weight += Complex(p.lorentz, p.dispersive);
    ++c.members;
  }
  for (auto& c : clusters) {
    c.omega /= c.members;
    c.gamma /= c.members;
  }
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    return a.omega != b.omega ? a.omega < b.omega : a.gamma < b.gamma;
  });
  return clusters;
}

}  // namespace

AsymmetryReport degree_of_asymmetry(const SpectrumResult& spectrum) {
  require_symmetric_grid(spectrum.grid);
  const auto& s = spectrum.incoherent;
  const std::size_t n = spectrum.grid.size();
  if (s.size() != n) throw Error(ErrorCategory::Domain, "spectrum and grid lengths differ");

  AsymmetryReport report;
  report.s_max = *std::max_element(s.begin(), s.end());
  if (!(report.s_max > 0.0)) {
    throw Error(ErrorCategory::Domain, "degree of asymmetry undefined for a spectrum without a positive maximum");
  }
  double worst = 0.0;
  bool first = true;
  for (std::size_t k = n / 2; k < n; ++k) {
    const double w = spectrum.grid[k];
    if (!(w > 0.0)) continue;
    const double diff = std::abs(s[k] - s[n - 1 - k]);
    report.profile.emplace_back(w, diff);
    if (first || diff > worst) {
      worst = diff;
      report.argmax_omega = w;
      first = false;
    }
  }
  report.degree = worst / report.s_max;
  return report;
}

BalanceReport sister_peak_balance(std::span<const Peak> peaks) {
  double scale = 0.0;
  for (const auto& p : peaks) scale = std::max(scale, std::hypot(p.omega, 0.5 * p.gamma));
  const double tol = kPairTolerance * std::max(scale, 1.0);
  const auto clusters = cluster_peaks(peaks, tol);

  BalanceReport report;
  for (const auto& c : clusters) report.max_lorentz = std::max(report.max_lorentz, std::abs(c.weight.real()));

  std::vector<bool> used(clusters.size(), false);
  for (std::size_t a = 0; a < clusters.size(); ++a) {
    const Cluster& right = clusters[a];
    if (used[a] || std::abs(right.omega) <= tol) continue;
    std::size_t partner = clusters.size();
    for (std::size_t b = 0; b < clusters.size(); ++b) {
      if (b == a || used[b]) continue;
      if (std::abs(clusters[b].omega + right.omega) <= tol &&
          std::abs(clusters[b].gamma - right.gamma) <= tol) {
        partner = b;
        break;
      }
    }
    if (partner == clusters.size()) {
      if (std::abs(right.weight) <= kNegligibleWeight * report.max_lorentz) continue;
      std::ostringstream msg;
      msg << "peak at omega = " << right.omega << ", gamma = " << right.gamma
          << " has no mirror partner";
      throw Error(ErrorCategory::Numerical, msg.str());
    }
    used[a] = used[partner] = true;
    const bool a_is_right = right.omega > 0.0;
    const Cluster& pos = a_is_right ? right : clusters[partner];
    const Cluster& neg = a_is_right ? clusters[partner] : right;
    SisterPair pair;
    pair.omega = pos.omega;
    pair.gamma = 0.5 * (pos.gamma + neg.gamma);
    pair.weight_right = pos.weight;
    pair.weight_left = neg.weight;
    pair.residual = std::abs(pos.weight - std::conj(neg.weight));
    report.max_residual = std::max(report.max_residual, pair.residual);
    report.pairs.push_back(pair);
  }
  return report;
}

BalanceReport dressed_detailed_balance(double omega, double delta) {
  if (!(omega >= 10.0) || delta != 0.0) {
    throw Error(ErrorCategory::Domain,
                "dressed-state balance needs a single atom with Omega >= 10 gamma and Delta = 0");
  }
  const AtomEnsemble atom({Vec3::Zero()}, Vec3::UnitZ());
  DriveField drive;
  drive.omega0 = omega;
  drive.detuning = delta;
  drive.uniform = true;
  const auto model = build_liouvillian(atom, drive, CouplingMatrices::zero(1));
  const auto steady = steady_state(model);

  const Eigen::SelfAdjointEigenSolver<CMatrix> dressed(model.hamiltonian().matrix());
  const CVector minus_state = dressed.eigenvectors().col(0);
  const CVector plus_state = dressed.eigenvectors().col(1);
  const CMatrix& rho = steady.rho.matrix();
  const CMatrix lowering = sigma_minus(1, 0);

  DressedBalance balance;
  balance.rho_plus = plus_state.dot(rho * plus_state).real();
  balance.rho_minus = minus_state.dot(rho * minus_state).real();
  balance.rate_plus_minus = model.couplings().gamma_single() *
                            std::norm(minus_state.dot(lowering * plus_state));
  balance.rate_minus_plus = model.couplings().gamma_single() *
                            std::norm(plus_state.dot(lowering * minus_state));
  balance.flux = balance.rho_plus * balance.rate_plus_minus;
  balance.residual =
      std::abs(balance.flux - balance.rho_minus * balance.rate_minus_plus);
  balance.splitting = dressed.eigenvalues()(1) - dressed.eigenvalues()(0);

  const auto peaks = peak_decomposition(model, steady.rho, DetectorGeometry(Vec3::UnitX()));
  for (double target : {-balance.splitting, balance.splitting}) {
    const auto nearest = std::min_element(peaks.begin(), peaks.end(), [&](const Peak& a, const Peak& b) {
      return std::abs(a.omega - target) < std::abs(b.omega - target);
    });
    balance.side_peaks.push_back(*nearest);
    balance.max_dispersive_ratio = std::max(balance.max_dispersive_ratio,
                                            std::abs(nearest->dispersive / nearest->lorentz));
  }

  BalanceReport report = sister_peak_balance(peaks);
  report.detailed_balance_residual = balance.residual;
  report.dressed = std::move(balance);
  return report;
}

}  // namespace resfluor
