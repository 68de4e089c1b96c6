#include "resfluor/pipeline.hpp"

#include "resfluor/errors.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace resfluor {

LiouvillianModel build_model(const Scenario& scenario) {
  const bool needs_geometry = !scenario.options.zero_collective && !scenario.options.uniform_couplings;
  const CouplingMatrices couplings = needs_geometry ? build_couplings(scenario.ensemble)
                                                    : CouplingMatrices::zero(scenario.ensemble.size());
  return build_liouvillian(scenario.ensemble, scenario.drive, couplings, scenario.options);
}

PipelineResult run_pipeline(const Scenario& scenario, const SpectrumOptions& options) {
  LiouvillianModel model = build_model(scenario);
  SteadyState steady = steady_state(model);
  const double width = scenario.grid_width > 0.0 ? scenario.grid_width : default_grid_width(model);
  const auto grid = uniform_grid(width, scenario.grid_points);
  SpectrumResult spectrum = power_spectrum(model, steady.rho, scenario.detector, grid, options);
  const double intensity = steady_intensity(model, steady.rho, scenario.detector);
  AsymmetryReport asymmetry = degree_of_asymmetry(spectrum);
  return PipelineResult{std::move(model), std::move(steady), intensity, std::move(spectrum),
                        std::move(asymmetry)};
}

Scenario with_addressing(const Scenario& base, double omega1, double ratio) {
  if (!(omega1 >= 0.0)) throw Error(ErrorCategory::Domain, "addressed Rabi frequency must be >= 0");
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw Error(ErrorCategory::Domain, "Rabi ratio must lie in [0, 1]");
  Scenario out = base;
  std::vector<double> rabi(base.ensemble.size(), ratio * omega1);
  rabi.front() = omega1;
  out.options.rabi_override = std::move(rabi);
  return out;
}

std::vector<SweepPoint> asymmetry_sweep(const Scenario& base, const std::vector<double>& ratios,
                                        int workers) {
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] >= 0.0 && ratios[i] <= 1.0)) {
      throw Error(ErrorCategory::Domain, "sweep ratios must lie in [0, 1]");
    }
    if (i > 0 && !(ratios[i] > ratios[i - 1])) {
      throw Error(ErrorCategory::Domain, "sweep ratios must be strictly ascending");
    }
  }
  if (base.ensemble.size() < 2) throw Error(ErrorCategory::Domain, "a ratio sweep needs at least two atoms");
  const double omega1 = base.options.rabi_override ? base.options.rabi_override->front()
                                                   : rabi_frequencies(base.ensemble, base.drive).front();
  // One grid for every ratio so that D values are comparable.
  Scenario fixed = base;
  if (fixed.grid_width <= 0.0) fixed.grid_width = default_grid_width(build_model(with_addressing(base, omega1, 1.0)));

  std::vector<SweepPoint> out(ratios.size());
  parallel_for(ratios.size(), workers, [&](std::size_t i) {
    const auto result = run_pipeline(with_addressing(fixed, omega1, ratios[i]));
    out[i] = {ratios[i], result.asymmetry.degree};
  });
  return out;
}

double permutation_symmetry_check(int atoms, double j, double gamma, double omega, double delta,
                                  const DetectorGeometry& detector, double spacing) {
  if (atoms < 2 || atoms > 5) throw Error(ErrorCategory::Domain, "permutation check supports 2 to 5 atoms");
  std::vector<Vec3> positions;
  for (int i = 0; i < atoms; ++i) positions.emplace_back(spacing * i, 0.0, 0.0);
  DriveField drive;
  drive.omega0 = omega;
  drive.detuning = delta;
  drive.uniform = true;
  ModelOptions options;
  options.uniform_couplings = std::make_pair(j, gamma);
  Scenario scenario{"permutation", AtomEnsemble(std::move(positions), Vec3::UnitZ()), drive, options,
                    detector};
  return run_pipeline(scenario).asymmetry.degree;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(workers, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace resfluor
