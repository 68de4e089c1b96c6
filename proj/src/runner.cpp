#include "resfluor/runner.hpp"

#include "resfluor/errors.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>

namespace resfluor {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kSweepHeader = "omega1,ratio,D,status";

// Shortest representation that reads back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::binary | std::ios::out | mode);
  if (!out) throw Error(ErrorCategory::Io, "cannot write '" + path.string() + "'");
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot create '" + dir.string() + "': " + ec.message());
}

ojson matrix_json(const Eigen::MatrixXd& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

const char* method_name(SpectrumMethod m) {
  switch (m) {
    case SpectrumMethod::Eigenmodes:
      return "eigenmodes";
    case SpectrumMethod::TimeDomain:
      return "time_domain";
    default:
      return "automatic";
  }
}

}  // namespace

fs::path resolve_out_dir(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return fs::current_path();
}

void write_spectrum_csv(const fs::path& path, const SpectrumResult& spectrum) {
  const auto split = symmetric_asymmetric_split(spectrum);
  auto out = open_out(path);
  out << "omega,S_inc,S_sy,S_asy\n";
  for (std::size_t k = 0; k < spectrum.grid.size(); ++k) {
    out << fmt(spectrum.grid[k]) << ',' << fmt(spectrum.incoherent[k]) << ',' << fmt(split.symmetric[k])
        << ',' << fmt(split.antisymmetric[k]) << '\n';
  }
  if (!out) throw Error(ErrorCategory::Io, "failed writing '" + path.string() + "'");
}

ojson summary_json(const ScenarioConfig& config, const PipelineResult& r) {
  ojson j;
  j["name"] = config.name;
  j["version"] = kVersion;
  j["method"] = method_name(r.spectrum.method);
  j["D"] = r.asymmetry.degree;
  j["S_max"] = r.asymmetry.s_max;
  j["argmax_omega"] = r.asymmetry.argmax_omega;
  j["intensity"] = r.intensity;
  j["coherent_weight"] = r.spectrum.coherent_weight;
  j["steady_state_residual"] = r.steady.residual;
  j["grid"] = {{"width", r.spectrum.grid.back()}, {"points", r.spectrum.grid.size()}};
  j["detector"] = {r.spectrum.detector.x(), r.spectrum.detector.y(), r.spectrum.detector.z()};
  j["rabi"] = r.model.rabi();
  j["J"] = matrix_json(r.model.couplings().exchange());
  j["Gamma"] = matrix_json(r.model.couplings().damping());
  ojson peaks = ojson::array();
  for (const auto& p : r.spectrum.peaks) {
    if (p.stationary) continue;
    peaks.push_back({{"omega", p.omega}, {"gamma", p.gamma}, {"L", p.lorentz}, {"K", p.dispersive}});
  }
  j["peaks"] = peaks;
  j["config"] = to_json(config);
  return j;
}

RunOutputs run_scenario(const ScenarioConfig& config, const fs::path& out_dir) {
  ensure_dir(out_dir);
  RunOutputs out{out_dir / (config.name + "_spectrum.csv"), out_dir / (config.name + "_summary.json"),
                 run_pipeline(config.resolve())};
  write_spectrum_csv(out.spectrum_csv, out.result.spectrum);
  auto js = open_out(out.summary_json);
  js << summary_json(config, out.result).dump(2) << '\n';
  if (!js) throw Error(ErrorCategory::Io, "failed writing '" + out.summary_json.string() + "'");
  return out;
}

std::vector<double> parse_ratio_axis(const std::string& spec) {
  std::istringstream in(spec);
  std::string a, b, c;
  if (!std::getline(in, a, ':') || !std::getline(in, b, ':') || !std::getline(in, c) || c.find(':') != c.npos) {
    throw Error(ErrorCategory::Schema, "ratio axis must look like start:stop:count, got '" + spec + "'");
  }
  SweepSpec s;
  try {
    std::size_t used = 0;
    s.start = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(a);
    s.stop = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
    s.count = std::stoi(c, &used);
    if (used != c.size()) throw std::invalid_argument(c);
  } catch (const std::logic_error&) {
    throw Error(ErrorCategory::Schema, "ratio axis must look like start:stop:count, got '" + spec + "'");
  }
  return s.ratios();
}

SweepOutputs run_sweep(const ScenarioConfig& config, const std::vector<double>& omega1,
                       const std::vector<double>& ratios, const fs::path& out_dir, int workers) {
  ensure_dir(out_dir);
  SweepOutputs result;
  result.csv = out_dir / (config.name + "_sweep.csv");

  struct Job {
    double omega1, ratio;
  };
  std::vector<Job> jobs;
  for (double w : omega1) {
    for (double r : ratios) jobs.push_back({w, r});
  }
  auto key = [](const Job& job) { return fmt(job.omega1) + ',' + fmt(job.ratio) + ','; };

  // Keep the leading rows of an earlier run that match this job list.
  std::vector<std::string> kept;
  if (std::ifstream prev(result.csv, std::ios::binary); prev) {
    std::string line;
    if (std::getline(prev, line) && line == kSweepHeader) {
      while (kept.size() < jobs.size() && std::getline(prev, line)) {
        const std::string k = key(jobs[kept.size()]);
        if (line.rfind(k, 0) != 0 || line.size() < 3 || line.compare(line.size() - 3, 3, ",ok") != 0) break;
        kept.push_back(line);
      }
    }
  }
  result.resumed_rows = static_cast<int>(kept.size());

  auto out = open_out(result.csv);
  out << kSweepHeader << '\n';
  for (const auto& line : kept) out << line << '\n';
  out.flush();

  const Scenario base = config.resolve();
  // Fix the grid for every row from the equal-drive case of the largest omega1.
  Scenario fixed = base;
  if (fixed.grid_width <= 0.0 && !jobs.empty()) {
    double wmax = 0.0;
    for (double w : omega1) wmax = std::max(wmax, w);
    fixed.grid_width = default_grid_width(build_model(with_addressing(base, wmax, 1.0)));
  }

  const std::size_t first = kept.size();
  std::vector<std::optional<std::string>> rows(jobs.size() - first);
  std::size_t next_to_write = 0;
  std::mutex mutex;

  parallel_for(rows.size(), workers, [&](std::size_t i) {
    const Job& job = jobs[first + i];
    std::string row;
    int code = 0;
    try {
      const auto r = run_pipeline(with_addressing(fixed, job.omega1, job.ratio));
      row = key(job) + fmt(r.asymmetry.degree) + ",ok";
    } catch (const Error& e) {
      code = exit_code(e.category());
      row = key(job) + "nan,error:" + std::string(category_name(e.category()));
    } catch (const std::exception&) {
      code = exit_code(ErrorCategory::Numerical);
      row = key(job) + "nan,error:unexpected";
    }
    std::lock_guard lock(mutex);
    if (code != 0) {
      if (result.failures++ == 0) result.first_failure_code = code;
    }
    rows[i] = std::move(row);
    while (next_to_write < rows.size() && rows[next_to_write]) {
      out << *rows[next_to_write] << '\n';
      out.flush();
      ++next_to_write;
    }
  });
  if (!out) throw Error(ErrorCategory::Io, "failed writing '" + result.csv.string() + "'");
  return result;
}

}  // namespace resfluor
