#include "resfluor/spectrum.hpp"

#include "resfluor/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace resfluor {

namespace {

constexpr double kInvPi = 1.0 / kPi;
constexpr double kTailFraction = 1e-8;
constexpr int kMaxTailDoublings = 4;

// Emission row a (a . vec(X) = Tr[A X], A = sum_mu e^{i phi_mu} s+_mu) and the
// connected source vec(B rho - <B> rho), B = sum_nu e^{-i phi_nu} s-_nu.
struct DetectionVectors {
  CRowVector emit;
  CVector source;
};

std::vector<Complex> phases(const LiouvillianModel& model, const DetectorGeometry* detector) {
  std::vector<Complex> out;
  for (const auto& r : model.ensemble().positions()) {
    out.push_back(detector ? std::polar(1.0, detector->phase(r)) : Complex(1.0));
  }
  return out;
}

CMatrix collective_lowering(const LiouvillianModel& model, const DetectorGeometry& detector) {
  const int atoms = model.atoms();
  const auto phase = phases(model, &detector);
  CMatrix b = CMatrix::Zero(model.hilbert_dim(), model.hilbert_dim());
  for (int nu = 0; nu < atoms; ++nu) b += std::conj(phase[nu]) * sigma_minus(atoms, nu);
  return b;
}

DetectionVectors detection_vectors(const LiouvillianModel& model, const CMatrix& rho,
                                   const DetectorGeometry& detector) {
  const CMatrix b = collective_lowering(model, detector);
  const CMatrix a = b.adjoint();
  const Complex mean_b = (b * rho).trace();
  return {trace_functional(a), vec(b * rho - mean_b * rho)};
}

void require_decomposable(const SpectralDecomposition& dec) {
  if (dec.defective) {
    std::ostringstream msg;
    msg << "generator eigenbasis is ill-conditioned (condition " << dec.condition
        << "); eigenmode expansion unavailable";
    throw Error(ErrorCategory::Unsupported, msg.str());
  }
}

// Eigenmode weights c_p = (a . r_p)(l_p . v) of the detector-weighted correlator.
CVector mode_weights(const SpectralDecomposition& dec, const DetectionVectors& det) {
  const CRowVector emit = det.emit * dec.right;
  const CVector source = dec.left * det.source;
  return emit.transpose().cwiseProduct(source);
}

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  static constexpr int kOrder = 16;
  std::array<double, kOrder> nodes{};
  std::array<double, kOrder> weights{};

  GaussLegendre() {
    for (int i = 0; i < kOrder; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (kOrder + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= kOrder; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = kOrder * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

// Quintic Hermite basis on t in [0, 1]: value, slope and curvature at both ends.
std::array<double, 6> hermite_quintic(double t) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  return {1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
          t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
          0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
          10.0 * t3 - 15.0 * t4 + 6.0 * t5,
          -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
          0.5 * t3 - t4 + 0.5 * t5};
}

// m_j = int_0^h e^{-i w s} H_j(s/h) ds, split into panels of at most one radian of phase.
std::array<Complex, 6> hermite_moments(double w, double h, const GaussLegendre& gl) {
  std::array<Complex, 6> m{};
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(w) * h)));
  const double width = h / panels;
  for (int panel = 0; panel < panels; ++panel) {
    const double left = panel * width;
    for (int i = 0; i < GaussLegendre::kOrder; ++i) {
      const double s = left + 0.5 * width * (gl.nodes[i] + 1.0);
      const Complex phase = std::polar(0.5 * width * gl.weights[i], -w * s);
      const auto basis = hermite_quintic(s / h);
      for (int j = 0; j < 6; ++j) m[j] += phase * basis[j];
    }
  }
  return m;
}

SpectrumResult time_domain_spectrum(const LiouvillianModel& model, const CMatrix& rho,
                                    const DetectorGeometry& detector,
                                    std::span<const double> grid,
                                    const SpectrumOptions& options) {
  const auto det = detection_vectors(model, rho, detector);
  const CMatrix& gen = model.generator();
  const CRowVector emit1 = det.emit * gen;
  const CRowVector emit2 = emit1 * gen;

  // The eigenvalues only pick the step and horizon; no eigenvector enters here.
  const auto& dec = model.decomposition();
  const double fastest = std::max(1.0, dec.fastest_frequency());
  const double step = std::min(0.1, 0.4 / fastest);
  const double slowest = dec.slowest_rate();
  double horizon = std::isfinite(slowest) ? 50.0 / slowest : 50.0;
  horizon = std::min(horizon, options.max_initial_tau);
  std::size_t intervals = static_cast<std::size_t>(std::ceil(horizon / step));

  const CMatrix prop = propagator(model, step);
  std::vector<Complex> g, g1, g2;  // value, h * slope, h^2 * curvature
  CVector v = det.source;
  auto bilinear = [](const CRowVector& row, const CVector& col) { return (row * col)(0, 0); };
  auto sample = [&] {
    g.push_back(bilinear(det.emit, v));
    g1.push_back(step * bilinear(emit1, v));
    g2.push_back(step * step * bilinear(emit2, v));
  };
  sample();
  const double initial = std::abs(g.front());
  int doublings = 0;
  while (true) {
    while (g.size() <= intervals) {
      v = prop * v;
      sample();
    }
    const double tail = std::max(std::abs(g.back()), std::abs(g1.back()) / (step * fastest));
    if (tail <= kTailFraction * initial) break;
    if (++doublings > kMaxTailDoublings) {
      std::ostringstream msg;
      msg << "time-domain correlator has not decayed by tau = " << intervals * step
          << " (|g| = " << tail << ", |g(0)| = " << initial << ")";
      throw Error(ErrorCategory::Numerical, msg.str());
    }
    intervals *= 2;
  }

  static const GaussLegendre gl;
  SpectrumResult out;
  out.grid.assign(grid.begin(), grid.end());
  out.incoherent.reserve(grid.size());
  const std::size_t n = intervals;
  for (double w : grid) {
    const auto m = hermite_moments(w, step, gl);
    std::array<Complex, 6> sums{};
    for (std::size_t k = 0; k < n; ++k) {
      const Complex phase = std::polar(1.0, -w * step * static_cast<double>(k));
      sums[0] += phase * g[k];
      sums[1] += phase * g1[k];
      sums[2] += phase * g2[k];
      sums[3] += phase * g[k + 1];
      sums[4] += phase * g1[k + 1];
      sums[5] += phase * g2[k + 1];
    }
    Complex total = 0.0;
    for (int j = 0; j < 6; ++j) total += m[j] * sums[j];
    out.incoherent.push_back(kInvPi * total.real());
  }
  out.method = SpectrumMethod::TimeDomain;
  return out;
}

}  // namespace

DetectorGeometry::DetectorGeometry(Vec3 direction) : direction_(std::move(direction)) {
  if (std::abs(direction_.norm() - 1.0) > 1e-12) {
    throw Error(ErrorCategory::Domain, "detector direction must be a unit vector");
  }
}

DetectorGeometry DetectorGeometry::in_plane(double theta) {
  return DetectorGeometry(Vec3(std::cos(theta), std::sin(theta), 0.0));
}

double DetectorGeometry::phase(const Vec3& position) const {
  return kWavenumber * direction_.dot(position);
}

double Peak::evaluate(double w) const {
  const double half = 0.5 * gamma;
  const double detuned = w - omega;
  return kInvPi * (lorentz * half - dispersive * detuned) / (half * half + detuned * detuned);
}

double reconstruct(std::span<const Peak> peaks, double w) {
  double total = 0.0;
  for (const auto& peak : peaks) {
    if (!peak.stationary) total += peak.evaluate(w);
  }
  return total;
}

std::vector<double> uniform_grid(double width, int points) {
  if (!(width > 0.0) || points < 3 || points % 2 == 0) {
    throw Error(ErrorCategory::Domain, "grid needs a positive width and an odd point count >= 3");
  }
  const int half = (points - 1) / 2;
  std::vector<double> grid(points);
  for (int k = 0; k < points; ++k) grid[k] = width * static_cast<double>(k - half) / half;
  return grid;
}

double default_grid_width(const LiouvillianModel& model) {
  double scale = std::max(1.0, std::abs(model.detuning()));
  for (double omega : model.rabi()) scale = std::max(scale, omega);
  scale = std::max(scale, model.couplings().exchange().cwiseAbs().maxCoeff());
  return 5.0 * scale;
}

std::vector<double> wide_grid(double core, int core_points, double outer, int tail_points) {
  if (!(outer > core) || tail_points < 1) {
    throw Error(ErrorCategory::Domain, "outer edge must exceed the core and tails need points");
  }
  const auto inner = uniform_grid(core, core_points);
  std::vector<double> tail;
  const double ratio = std::pow(outer / core, 1.0 / tail_points);
  for (int j = 1; j <= tail_points; ++j) tail.push_back(core * std::pow(ratio, j));
  std::vector<double> grid;
  for (auto it = tail.rbegin(); it != tail.rend(); ++it) grid.push_back(-*it);
  grid.insert(grid.end(), inner.begin(), inner.end());
  grid.insert(grid.end(), tail.begin(), tail.end());
  return grid;
}

void require_symmetric_grid(std::span<const double> grid) {
  const std::size_t n = grid.size();
  if (n == 0) throw Error(ErrorCategory::Domain, "empty frequency grid");
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      throw Error(ErrorCategory::Domain, "frequency grid must be strictly ascending");
    }
    if (grid[k] != -grid[n - 1 - k]) {
      throw Error(ErrorCategory::Domain, "frequency grid is not symmetric about zero");
    }
  }
}

double steady_intensity(const LiouvillianModel& model, const OperatorDense& rho,
                        const DetectorGeometry& detector) {
  const CMatrix b = collective_lowering(model, detector);
  const Complex value = (b.adjoint() * b * rho.matrix()).trace();
  if (std::abs(value.imag()) > 1e-10) {
    throw Error(ErrorCategory::Numerical, "steady intensity has an imaginary part");
  }
  return value.real();
}

double coherent_weight(const LiouvillianModel& model, const OperatorDense& rho,
                       const DetectorGeometry& detector) {
  const CMatrix b = collective_lowering(model, detector);
  return std::norm((b * rho.matrix()).trace());
}

Complex CorrelatorSet::value(int mu, int nu, double tau) const {
  if (has_modes()) {
    Complex total = 0.0;
    for (Eigen::Index p = 0; p < rates_.size(); ++p) {
      total += emit_(mu, p) * source_(p, nu) * std::exp(rates_(p) * tau);
    }
    return total;
  }
  const auto it = std::lower_bound(taus_.begin(), taus_.end(), tau);
  if (it == taus_.end() || *it != tau) {
    throw Error(ErrorCategory::Domain, "tau is not on the sampled correlator grid");
  }
  return samples_[static_cast<std::size_t>(it - taus_.begin())](mu, nu);
}

Complex CorrelatorSet::coherent_offset(int mu, int nu) const {
  return mean_plus_(mu) * mean_minus_(nu);
}

namespace {

void fill_means(const LiouvillianModel& model, const CMatrix& rho, CVector& plus,
                CVector& minus) {
  const int atoms = model.atoms();
  plus.resize(atoms);
  minus.resize(atoms);
  for (int mu = 0; mu < atoms; ++mu) {
    plus(mu) = (sigma_plus(atoms, mu) * rho).trace();
    minus(mu) = (sigma_minus(atoms, mu) * rho).trace();
  }
}

}  // namespace

CorrelatorSet qrt_correlators(const LiouvillianModel& model, const OperatorDense& rho) {
  const auto& dec = model.decomposition();
  require_decomposable(dec);
  const int atoms = model.atoms();
  CorrelatorSet set;
  set.atoms_ = atoms;
  fill_means(model, rho.matrix(), set.mean_plus_, set.mean_minus_);
  set.rates_ = dec.eigenvalues;
  set.emit_.resize(atoms, dec.size());
  set.source_.resize(dec.size(), atoms);
  for (int mu = 0; mu < atoms; ++mu) {
    set.emit_.row(mu) = trace_functional(sigma_plus(atoms, mu)) * dec.right;
    set.source_.col(mu) = dec.left * vec(sigma_minus(atoms, mu) * rho.matrix());
  }
  return set;
}

CorrelatorSet qrt_correlators(const LiouvillianModel& model, const OperatorDense& rho,
                              std::span<const double> tau_grid, EvolutionMethod method) {
  const int atoms = model.atoms();
  CorrelatorSet set;
  set.atoms_ = atoms;
  fill_means(model, rho.matrix(), set.mean_plus_, set.mean_minus_);
  set.taus_.assign(tau_grid.begin(), tau_grid.end());
  set.samples_.assign(tau_grid.size(), CMatrix::Zero(atoms, atoms));
  std::vector<CRowVector> emit;
  for (int mu = 0; mu < atoms; ++mu) emit.push_back(trace_functional(sigma_plus(atoms, mu)));
  for (int nu = 0; nu < atoms; ++nu) {
    const CVector start = vec(sigma_minus(atoms, nu) * rho.matrix());
    const auto path = evolve_vectorized(model, start, tau_grid, method);
    for (std::size_t k = 0; k < path.size(); ++k) {
      for (int mu = 0; mu < atoms; ++mu) set.samples_[k](mu, nu) = (emit[mu] * path[k])(0, 0);
    }
  }
  return set;
}

std::vector<Complex> summed_connected_correlator(const LiouvillianModel& model,
                                                 const OperatorDense& rho,
                                                 const DetectorGeometry& detector,
                                                 std::span<const double> taus) {
  const auto& dec = model.decomposition();
  require_decomposable(dec);
  const CVector c = mode_weights(dec, detection_vectors(model, rho.matrix(), detector));
  std::vector<Complex> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    Complex total = 0.0;
    for (Eigen::Index p = 0; p < c.size(); ++p) {
      if (p == dec.stationary) continue;
      total += c(p) * std::exp(dec.eigenvalues(p) * tau);
    }
    out.push_back(total);
  }
  return out;
}

std::vector<Peak> peak_decomposition(const LiouvillianModel& model, const OperatorDense& rho,
                                     const DetectorGeometry& detector) {
  const auto& dec = model.decomposition();
  require_decomposable(dec);
  const CVector c = mode_weights(dec, detection_vectors(model, rho.matrix(), detector));
  std::vector<Peak> peaks;
  peaks.reserve(c.size());
  for (Eigen::Index p = 0; p < c.size(); ++p) {
    const Complex lambda = dec.eigenvalues(p);
    peaks.push_back(Peak{lambda.imag(), -2.0 * lambda.real(), c(p).real(), -c(p).imag(),
                         p == dec.stationary});
  }
  return peaks;
}

SpectrumResult power_spectrum(const LiouvillianModel& model, const OperatorDense& rho,
                              const DetectorGeometry& detector, std::span<const double> grid,
                              const SpectrumOptions& options) {
  require_symmetric_grid(grid);
  SpectrumMethod method = options.method;
  if (method == SpectrumMethod::Automatic) {
    method = model.decomposition().defective ? SpectrumMethod::TimeDomain
                                             : SpectrumMethod::Eigenmodes;
  }

  SpectrumResult out;
  if (method == SpectrumMethod::TimeDomain) {
    out = time_domain_spectrum(model, rho.matrix(), detector, grid, options);
  } else {
    out.peaks = peak_decomposition(model, rho, detector);
    out.grid.assign(grid.begin(), grid.end());
    out.incoherent.reserve(grid.size());
    for (double w : grid) out.incoherent.push_back(reconstruct(out.peaks, w));
    out.method = SpectrumMethod::Eigenmodes;
  }
  out.coherent_weight = coherent_weight(model, rho, detector);
  out.detector = detector.direction();
  return out;
}

SpectrumResult power_spectrum(const LiouvillianModel& model, const DetectorGeometry& detector,
                              int grid_points) {
  const auto steady = steady_state(model);
  const auto grid = uniform_grid(default_grid_width(model), grid_points);
  return power_spectrum(model, steady.rho, detector, grid);
}

SplitSpectrum symmetric_asymmetric_split(const SpectrumResult& spectrum) {
  require_symmetric_grid(spectrum.grid);
  const std::size_t n = spectrum.grid.size();
  SplitSpectrum out;
  out.symmetric.resize(n);
  out.antisymmetric.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double here = spectrum.incoherent[k];
    const double mirror = spectrum.incoherent[n - 1 - k];
    out.symmetric[k] = 0.5 * (here + mirror);
    out.antisymmetric[k] = 0.5 * (here - mirror);
  }
  return out;
}

SplitSpectrum split_from_correlator(const LiouvillianModel& model, const OperatorDense& rho,
                                    const DetectorGeometry& detector,
                                    std::span<const double> grid) {
  require_symmetric_grid(grid);
  const auto& dec = model.decomposition();
  require_decomposable(dec);
  const CVector c = mode_weights(dec, detection_vectors(model, rho.matrix(), detector));
  const Complex i1(0.0, 1.0);
  SplitSpectrum out;
  for (double w : grid) {
    Complex cosine = 0.0;  // int_0^inf g(tau) cos(w tau)
    Complex sine = 0.0;    // int_0^inf g(tau) sin(w tau)
    for (Eigen::Index p = 0; p < c.size(); ++p) {
      if (p == dec.stationary) continue;
      const Complex lambda = dec.eigenvalues(p);
      const Complex forward = 1.0 / (i1 * w - lambda);    // int e^{-i w tau} e^{lambda tau}
      const Complex backward = 1.0 / (-i1 * w - lambda);  // int e^{+i w tau} e^{lambda tau}
      cosine += c(p) * 0.5 * (forward + backward);
      sine += c(p) * (backward - forward) / (2.0 * i1);
    }
    // Re g contributes through the cosine transform, Im g through the sine transform.
    out.symmetric.push_back(kInvPi * cosine.real());
    out.antisymmetric.push_back(kInvPi * sine.imag());
  }
  return out;
}

PairSpectra pair_spectra(const LiouvillianModel& model, const OperatorDense& rho,
                         std::span<const double> grid, const DetectorGeometry* detector) {
  const auto& dec = model.decomposition();
  require_decomposable(dec);
  const int atoms = model.atoms();
  const auto phase = phases(model, detector);
  const CMatrix& r = rho.matrix();

  std::vector<CRowVector> emit;
  std::vector<CVector> source;
  for (int mu = 0; mu < atoms; ++mu) {
    emit.push_back(trace_functional(sigma_plus(atoms, mu)) * dec.right);
    const CMatrix lowered = sigma_minus(atoms, mu) * r;
    source.push_back(dec.left * vec(lowered - lowered.trace() * r));
  }

  PairSpectra out;
  out.atoms = atoms;
  out.grid.assign(grid.begin(), grid.end());
  const Complex i1(0.0, 1.0);
  for (int mu = 0; mu < atoms; ++mu) {
    for (int nu = 0; nu < atoms; ++nu) {
      const Complex factor = phase[mu] * std::conj(phase[nu]);
      std::vector<Complex> values;
      values.reserve(grid.size());
      for (double w : grid) {
        Complex total = 0.0;
        for (Eigen::Index p = 0; p < dec.size(); ++p) {
          if (p == dec.stationary) continue;
          total += emit[mu](p) * source[nu](p) / (i1 * w - dec.eigenvalues(p));
        }
        values.push_back(kInvPi * factor * total);
      }
      out.terms.push_back(std::move(values));
    }
  }
  return out;
}

}  // namespace resfluor
