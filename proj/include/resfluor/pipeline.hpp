#pragma once

// End-to-end evaluation of a scenario, and the scenario-level analyses that
// rerun it: Rabi-ratio sweeps and the permutation-symmetry check.

#include "resfluor/analysis.hpp"

#include <functional>
#include <string>
#include <vector>

namespace resfluor {

/// Fully resolved physical inputs of one run.
struct Scenario {
  std::string name;
  AtomEnsemble ensemble;
  DriveField drive;
  ModelOptions options;
  DetectorGeometry detector;
  double grid_width = 0.0;  // <= 0 selects default_grid_width
  int grid_points = 4001;
};

struct PipelineResult {
  LiouvillianModel model;
  SteadyState steady;
  double intensity = 0.0;
  SpectrumResult spectrum;
  AsymmetryReport asymmetry;
};

LiouvillianModel build_model(const Scenario& scenario);
PipelineResult run_pipeline(const Scenario& scenario, const SpectrumOptions& options = {});

struct SweepPoint {
  double ratio = 0.0;
  double degree = 0.0;
};

/// Runs `base` with atom 1 at its own Rabi frequency and every other atom at
/// `ratio` times that, for each ratio (ascending, within [0, 1]).
std::vector<SweepPoint> asymmetry_sweep(const Scenario& base, const std::vector<double>& ratios,
                                        int workers = 1);

/// Runs `base` with the Rabi frequency of atom 1 replaced by `omega1` and all
/// others by `ratio * omega1`.
Scenario with_addressing(const Scenario& base, double omega1, double ratio);

/// Equal drive `omega` on `atoms` atoms spaced `spacing` apart along x, with every
/// pair coupling forced to (j, gamma). Returns the degree of asymmetry.
double permutation_symmetry_check(int atoms, double j, double gamma, double omega, double delta,
                                  const DetectorGeometry& detector, double spacing = 640.0 / 780.0);

/// Calls fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace resfluor
