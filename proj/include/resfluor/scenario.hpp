#pragma once

// JSON scenario files and the built-in presets.
//
// Document layout (all keys optional unless noted):
//
//   {
//     "name": "fig3a_addressed",
//     "units": {"length": "lambda0" | "nm", "lambda0_nm": 780},
//     "atoms": {"positions": [[x, y, z], ...], "dipole": [0, 0, 1]},     // positions required
//     "drive": {"mode": "beam" | "uniform" | "per_atom",
//               "omega0": 0.1, "fwhm": 0.77, "center": [0, 0, 0], "beam_axis": [0, 0, 1],
//               "rabi": [0.1, 0.004]},                                  // rabi only for per_atom
//     "detuning": 1.0,
//     "detector": {"theta": 0.92} | {"direction": [0, 1, 0]},
//     "grid": {"width": 0, "points": 4001},
//     "collective": {"zero": false, "uniform": [J, Gamma]},
//     "sweep": {"ratios": [start, stop, count], "omega1": [0.1]}
//   }
//
// A single-atom shorthand {"N": 1, "omega0": 0.1, "detuning": 1} is also accepted.

#include "resfluor/pipeline.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace resfluor {

enum class DriveMode { Beam, Uniform, PerAtom };

struct SweepSpec {
  double start = 0.0;
  double stop = 1.0;
  int count = 21;
  std::vector<double> omega1;  // empty: use the scenario's own addressed Rabi frequency

  std::vector<double> ratios() const;
  bool operator==(const SweepSpec&) const = default;
};

/// Parsed configuration with every length already converted to lambda0.
struct ScenarioConfig {
  std::string name = "scenario";
  double lambda0_nm = 780.0;  // informational once lengths are converted
  std::vector<Vec3> positions;
  Vec3 dipole = Vec3::UnitZ();

  DriveMode drive_mode = DriveMode::Uniform;
  double omega0 = 0.0;
  double fwhm = 1.0;
  Vec3 center = Vec3::Zero();
  Vec3 beam_axis = Vec3::UnitZ();
  std::vector<double> rabi;  // per_atom mode only
  double detuning = 0.0;

  std::optional<double> detector_theta;  // when set, direction = (cos, sin, 0)
  Vec3 detector_direction = Vec3::UnitX();

  double grid_width = 0.0;
  int grid_points = 4001;

  bool zero_collective = false;
  std::optional<std::pair<double, double>> uniform_couplings;

  std::optional<SweepSpec> sweep;

  bool operator==(const ScenarioConfig&) const = default;

  /// Builds the physical scenario. Throws `Invariant` when the description is inconsistent.
  Scenario resolve() const;
};

/// Parses and validates a configuration document. `origin` labels error messages.
ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ScenarioConfig load_config(const std::string& path);

/// Canonical serialization (lengths in lambda0, stable key order).
nlohmann::ordered_json to_json(const ScenarioConfig& config);

ScenarioConfig expand_preset(const std::string& id);
std::vector<std::string> list_presets();

}  // namespace resfluor
