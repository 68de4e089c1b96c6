#include "resfluor/errors.hpp"
#include "resfluor/runner.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace resfluor;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  const fs::path dir = fs::temp_directory_path() / ("resfluor_" + tag + "_" + std::to_string(rng()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" RESFLUOR_CLI_PATH "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ErrorCategory category_of(const std::string& text) {
  try {
    parse_config(text, "t.json");
  } catch (const Error& e) {
    return e.category();
  }
  FAIL("configuration was accepted");
  return ErrorCategory::Io;
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text, "t.json");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

constexpr const char* kPair = R"({
  "name": "pair",
  "atoms": {"positions": [[0, 0, 0], [0.8, 0, 0]]},
  "drive": {"mode": "beam", "omega0": 0.1, "fwhm": 0.77},
  "detuning": 1,
  "detector": {"theta": 0.92},
  "grid": {"points": 201}
})";

}  // namespace

TEST_CASE("single-atom shorthand") {
  const auto cfg = parse_config(R"({"N": 1, "omega0": 0.1, "detuning": 1})");
  CHECK(cfg.positions.size() == 1);
  CHECK(cfg.omega0 == 0.1);
  CHECK(cfg.detuning == 1.0);
  CHECK(cfg.drive_mode == DriveMode::Uniform);
  CHECK(category_of(R"({"N": 2, "omega0": 0.1})") == ErrorCategory::Invariant);
  CHECK(category_of(R"({"N": 1, "atoms": {"positions": [[0,0,0]]}})") == ErrorCategory::Schema);
}

TEST_CASE("every preset survives a JSON round trip") {
  const auto ids = list_presets();
  CHECK(ids.size() == 10);
  for (const auto& id : ids) {
    const auto cfg = expand_preset(id);
    CHECK(cfg.name == id);
    CHECK(parse_config(to_json(cfg).dump()) == cfg);
    CHECK(parse_config(to_json(cfg).dump(2)) == cfg);
    CHECK_NOTHROW(cfg.resolve());
  }
  CHECK_THROWS_AS(expand_preset("fig9"), Error);
}

TEST_CASE("preset geometry") {
  const auto a = expand_preset("fig3a_addressed");
  REQUIRE(a.positions.size() == 2);
  CHECK(a.positions[1].x() == doctest::Approx(640.0 / 780.0));
  CHECK(a.fwhm == doctest::Approx(600.0 / 780.0));
  CHECK(*a.detector_theta == 0.92);
  CHECK(a.drive_mode == DriveMode::Beam);

  const auto sq = expand_preset("fig4a_2d");
  CHECK(sq.positions.size() == 5);
  for (std::size_t i = 1; i < sq.positions.size(); ++i) {
    CHECK(sq.positions[i].norm() == doctest::Approx(640.0 / 780.0));
  }

  const auto b5 = expand_preset("fig4b_5atom");
  CHECK(b5.positions.size() == 5);
  CHECK(b5.omega0 == 0.5);
  CHECK(b5.detector_direction.isApprox(Vec3::UnitY()));
  for (std::size_t i = 1; i < b5.positions.size(); ++i) {
    CHECK(b5.positions[i].norm() == doctest::Approx(std::sqrt(2.0) * 532.0 / 780.0));
  }
  CHECK(expand_preset("fig3b_sweep").sweep->ratios().size() == 21);
}

TEST_CASE("lengths in nanometres are converted") {
  const auto cfg = parse_config(R"({
    "units": {"length": "nm", "lambda0_nm": 780},
    "atoms": {"positions": [[0, 0, 0], [640, 0, 0]]},
    "drive": {"mode": "beam", "omega0": 0.1, "fwhm": 600}
  })");
  CHECK(cfg.positions[1].x() == doctest::Approx(640.0 / 780.0).epsilon(1e-15));
  CHECK(cfg.fwhm == doctest::Approx(600.0 / 780.0).epsilon(1e-15));
  CHECK(category_of(R"({"units": {"length": "nm"}, "atoms": {"positions": [[0,0,0]]}})") == ErrorCategory::Units);
  CHECK(category_of(R"({"units": {"length": "furlong"}, "atoms": {"positions": [[0,0,0]]}})") ==
        ErrorCategory::Units);
}

TEST_CASE("configuration errors are categorised and located") {
  const std::string bad_key = "{\n  \"atoms\": {\"positions\": [[0,0,0]]},\n  \"detunning\": 1\n}";
  CHECK(category_of(bad_key) == ErrorCategory::Schema);
  CHECK(message_of(bad_key).find("t.json:3:") != std::string::npos);
  CHECK(message_of(bad_key).find("/detunning") != std::string::npos);

  const std::string broken = "{\n  \"atoms\": {\n    \"positions\": [[0,0,0]],,\n  }\n}";
  CHECK(category_of(broken) == ErrorCategory::Schema);
  CHECK(message_of(broken).find("t.json:3:") != std::string::npos);

  CHECK(category_of(R"({"atoms": {"positions": [[0,0]]}})") == ErrorCategory::Schema);
  CHECK(category_of(R"({"atoms": {"positions": [[0,0,0]]}, "detuning": "one"})") == ErrorCategory::Schema);
  CHECK(category_of(R"({"drive": {"omega0": 1}})") == ErrorCategory::Schema);

  const std::string one = R"("atoms": {"positions": [[0,0,0]]})";
  CHECK(category_of("{" + one + R"(, "grid": {"points": 400}})") == ErrorCategory::Invariant);
  CHECK(category_of("{" + one + R"(, "detector": {"theta": 1, "direction": [1,0,0]}})") == ErrorCategory::Invariant);
  CHECK(category_of("{" + one + R"(, "drive": {"mode": "per_atom", "rabi": [1, 2]}})") == ErrorCategory::Invariant);
  CHECK(category_of("{" + one + R"(, "drive": {"rabi": [1]}})") == ErrorCategory::Invariant);
  CHECK(category_of("{" + one + R"(, "collective": {"zero": true, "uniform": [0, 0]}})") ==
        ErrorCategory::Invariant);
  CHECK(category_of(R"({"atoms": {"positions": [[0,0,0], [0,0,0]]}})") == ErrorCategory::Invariant);

  const std::string coincident = "{\n\"atoms\": {\"positions\": [[0,0,0], [0,0,0]]}\n}";
  CHECK(message_of(coincident).find("t.json:1:1: /:") != std::string::npos);

  CHECK_THROWS_AS(load_config("/nonexistent/scenario.json"), Error);
}

TEST_CASE("run_scenario outputs") {
  const auto dir = scratch("run");
  auto cfg = parse_config(kPair);
  const auto out = run_scenario(cfg, dir);
  CHECK(out.spectrum_csv == dir / "pair_spectrum.csv");

  const auto rows = lines(slurp(out.spectrum_csv));
  REQUIRE(rows.size() == 202);
  CHECK(rows[0] == "omega,S_inc,S_sy,S_asy");
  std::vector<double> omega, s;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream in(rows[i]);
    std::string f[4];
    for (auto& field : f) std::getline(in, field, ',');
    omega.push_back(std::stod(f[0]));
    s.push_back(std::stod(f[1]));
    CHECK(std::stod(f[2]) + std::stod(f[3]) == doctest::Approx(s.back()).epsilon(1e-12));
  }
  for (std::size_t k = 0; k < omega.size(); ++k) CHECK(omega[k] == -omega[omega.size() - 1 - k]);

  // D recomputed from the CSV alone.
  double s_max = 0.0, diff = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    s_max = std::max(s_max, s[k]);
    diff = std::max(diff, std::abs(s[k] - s[s.size() - 1 - k]));
  }
  const auto summary = nlohmann::json::parse(slurp(out.summary_json));
  CHECK(std::abs(summary["D"].get<double>() - diff / s_max) < 1e-12);
  CHECK(summary["name"] == "pair");
  CHECK(summary["version"] == kVersion);
  CHECK(summary["grid"]["points"] == 201);
  CHECK(summary["rabi"].size() == 2);
  CHECK(parse_config(summary["config"].dump()) == cfg);

  const std::string first = slurp(out.spectrum_csv);
  run_scenario(cfg, dir);
  CHECK(slurp(out.spectrum_csv) == first);
  fs::remove_all(dir);
}

TEST_CASE("sweeps write ordered rows and resume") {
  const auto dir = scratch("sweep");
  const auto cfg = parse_config(kPair);
  const auto out = run_sweep(cfg, {0.1}, {0.0, 0.5, 1.0}, dir, 2);
  CHECK(out.failures == 0);
  CHECK(out.resumed_rows == 0);
  const auto rows = lines(slurp(out.csv));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "omega1,ratio,D,status");
  CHECK(rows[1].rfind("0.1,0,", 0) == 0);
  CHECK(rows[2].rfind("0.1,0.5,", 0) == 0);
  CHECK(rows[3].rfind("0.1,1,", 0) == 0);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].substr(rows[i].size() - 3) == ",ok");

  // Drop the last row as if the run had been interrupted.
  {
    std::ofstream trunc(out.csv, std::ios::binary);
    trunc << rows[0] << '\n' << rows[1] << '\n' << rows[2] << '\n';
  }
  const auto again = run_sweep(cfg, {0.1}, {0.0, 0.5, 1.0}, dir, 1);
  CHECK(again.resumed_rows == 2);
  CHECK(lines(slurp(again.csv)) == rows);

  CHECK(parse_ratio_axis("0:1:5") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK_THROWS_AS(parse_ratio_axis("0:1"), Error);
  CHECK_THROWS_AS(parse_ratio_axis("0:x:3"), Error);
  fs::remove_all(dir);
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("cli");
  CHECK(run_cli("list-presets") == 0);
  CHECK(run_cli("run --preset mollow1 --grid-points 101 --out-dir '" + dir.string() + "'") == 0);
  CHECK(fs::exists(dir / "mollow1_spectrum.csv"));
  CHECK(fs::exists(dir / "mollow1_summary.json"));

  const auto env_dir = dir / "env";
  CHECK(run_cli("run --preset mollow1 --grid-points 101", std::string(kOutDirEnv) + "='" + env_dir.string() + "'") ==
        0);
  CHECK(fs::exists(env_dir / "mollow1_summary.json"));

  CHECK(run_cli("run --preset nope") == exit_code(ErrorCategory::Domain));
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
    return "run --out-dir '" + dir.string() + "' --config '" + (dir / name).string() + "'";
  };
  CHECK(run_cli(write("schema.json", R"({"atoms": 3})")) == exit_code(ErrorCategory::Schema));
  CHECK(run_cli(write("units.json", R"({"units": {"length": "nm"}, "atoms": {"positions": [[0,0,0]]}})")) ==
        exit_code(ErrorCategory::Units));
  CHECK(run_cli(write("inv.json", R"({"atoms": {"positions": [[0,0,0]]}, "grid": {"points": 4}})")) ==
        exit_code(ErrorCategory::Invariant));
  CHECK(run_cli("run --preset mollow1 --grid-points 100 --out-dir '" + dir.string() + "'") ==
        exit_code(ErrorCategory::Invariant));
  CHECK(run_cli("sweep --preset fig3b_sweep --ratios 0:2:3 --out-dir '" + dir.string() + "'") ==
        exit_code(ErrorCategory::Invariant));
  CHECK(run_cli("frobnicate") != 0);
  fs::remove_all(dir);
}
