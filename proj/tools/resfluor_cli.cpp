// Command-line front end: single runs, Rabi-ratio sweeps and the preset list.

#include "resfluor/errors.hpp"
#include "resfluor/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace resfluor;

namespace {

ScenarioConfig select_config(const std::string& preset, const std::string& config_path) {
  if (!preset.empty()) return expand_preset(preset);
  return load_config(config_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonance fluorescence spectra of laser-driven atom clusters"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string preset, config_path, out_dir;
  int grid_points = 0;
  double grid_width = -1.0;
  bool zero_collective = false;
  std::vector<double> uniform_jg;
  int workers = 1;

  auto* run = app.add_subcommand("run", "Compute one spectrum and write CSV + JSON summary");
  auto* run_src = run->add_option_group("source")->require_option(1);
  run_src->add_option("--preset", preset, "Built-in scenario id");
  run_src->add_option("--config", config_path, "JSON scenario file")->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir, std::string("Output directory (default $") + kOutDirEnv + " or .)");
  run->add_option("--grid-points", grid_points, "Odd number of frequency points")->check(CLI::PositiveNumber);
  run->add_option("--grid-width", grid_width, "Half-width of the frequency window in gamma (0 = automatic)")
      ->check(CLI::NonNegativeNumber);
  auto* zero_flag = run->add_flag("--zero-collective", zero_collective, "Set every J and Gamma to zero");
  run->add_option("--uniform-couplings", uniform_jg, "Force every pair coupling to J Gamma")
      ->expected(2)
      ->excludes(zero_flag);

  std::string ratios_spec;
  std::vector<double> omega1;
  auto* sweep = app.add_subcommand("sweep", "Degree of asymmetry versus the Rabi ratio Omega2/Omega1");
  auto* sweep_src = sweep->add_option_group("source")->require_option(1);
  sweep_src->add_option("--preset", preset, "Built-in scenario id (e.g. fig3b_sweep)");
  sweep_src->add_option("--config", config_path, "JSON scenario file")->check(CLI::ExistingFile);
  sweep->add_option("--ratios", ratios_spec, "start:stop:count");
  sweep->add_option("--omega1", omega1, "Addressed Rabi frequencies in gamma")->delimiter(',');
  sweep->add_option("--out-dir", out_dir, "Output directory");
  sweep->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-presets", "Print the built-in scenario ids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& id : list_presets()) std::cout << id << '\n';
      return 0;
    }

    ScenarioConfig cfg = select_config(preset, config_path);

    if (run->parsed()) {
      if (grid_points > 0) cfg.grid_points = grid_points;
      if (grid_width >= 0.0) cfg.grid_width = grid_width;
      if (zero_collective) {
        cfg.zero_collective = true;
        cfg.uniform_couplings.reset();
      }
      if (!uniform_jg.empty()) {
        cfg.uniform_couplings = std::make_pair(uniform_jg[0], uniform_jg[1]);
        cfg.zero_collective = false;
      }
      const auto out = run_scenario(cfg, resolve_out_dir(out_dir));
      std::cout << "D = " << out.result.asymmetry.degree << "  S_max = " << out.result.asymmetry.s_max
                << "  intensity = " << out.result.intensity << '\n'
                << "wrote " << out.spectrum_csv.string() << '\n'
                << "wrote " << out.summary_json.string() << '\n';
      return 0;
    }

    SweepSpec spec = cfg.sweep.value_or(SweepSpec{});
    const auto ratios = ratios_spec.empty() ? spec.ratios() : parse_ratio_axis(ratios_spec);
    if (omega1.empty()) omega1 = spec.omega1;
    if (omega1.empty()) omega1 = {cfg.resolve().drive.omega0};
    const auto out = run_sweep(cfg, omega1, ratios, resolve_out_dir(out_dir), workers);
    std::cout << "wrote " << out.csv.string();
    if (out.resumed_rows > 0) std::cout << " (resumed after " << out.resumed_rows << " rows)";
    std::cout << '\n';
    if (out.failures > 0) {
      std::cerr << out.failures << " sweep point(s) failed; see the status column\n";
      return out.first_failure_code;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
