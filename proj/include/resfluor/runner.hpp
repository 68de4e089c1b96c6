#pragma once

// File outputs for single runs and Rabi-ratio sweeps.

#include "resfluor/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace resfluor {

inline constexpr const char* kVersion = "0.1.0";
/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "RESFLUOR_OUT_DIR";

/// `explicit_dir` if non-empty, else $RESFLUOR_OUT_DIR, else the current directory.
std::filesystem::path resolve_out_dir(const std::string& explicit_dir);

struct RunOutputs {
  std::filesystem::path spectrum_csv;  // omega,S_inc,S_sy,S_asy
  std::filesystem::path summary_json;
  PipelineResult result;
};

/// Runs the pipeline and writes <name>_spectrum.csv and <name>_summary.json.
RunOutputs run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Writes the CSV and JSON sidecar for an existing result.
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumResult& spectrum);
nlohmann::ordered_json summary_json(const ScenarioConfig& config, const PipelineResult& result);

struct SweepOutputs {
  std::filesystem::path csv;  // omega1,ratio,D,status
  int failures = 0;
  int first_failure_code = 0;
  int resumed_rows = 0;
};

/// One row per (omega1, ratio) in that order. Rows are flushed as they complete;
/// a rerun keeps the leading rows already written with status "ok".
SweepOutputs run_sweep(const ScenarioConfig& config, const std::vector<double>& omega1,
                       const std::vector<double>& ratios, const std::filesystem::path& out_dir,
                       int workers = 1);

/// Parses "start:stop:count".
std::vector<double> parse_ratio_axis(const std::string& spec);

}  // namespace resfluor
