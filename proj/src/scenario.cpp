#include "resfluor/scenario.hpp"

#include "resfluor/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace resfluor {

using nlohmann::json;

namespace {

constexpr double kDefaultLambdaNm = 780.0;

// ---- source locations ------------------------------------------------------
// Maps a JSON pointer back to line:column in the original text. The text is
// known to be valid JSON by the time this runs.

std::size_t skip_ws(const std::string& s, std::size_t p) {
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t' || s[p] == '\n' || s[p] == '\r')) ++p;
  return p;
}

std::size_t skip_string(const std::string& s, std::size_t p) {
  for (++p; p < s.size() && s[p] != '"'; ++p) {
    if (s[p] == '\\') ++p;
  }
  return p + 1;
}

std::size_t skip_value(const std::string& s, std::size_t p) {
  p = skip_ws(s, p);
  if (p >= s.size()) return p;
  if (s[p] == '"') return skip_string(s, p);
  if (s[p] == '{' || s[p] == '[') {
    int depth = 0;
    while (p < s.size()) {
      const char c = s[p];
      if (c == '"') {
        p = skip_string(s, p);
        continue;
      }
      if (c == '{' || c == '[') ++depth;
      if (c == '}' || c == ']') {
        if (--depth == 0) return p + 1;
      }
      ++p;
    }
    return p;
  }
  while (p < s.size() && std::string_view(",}] \t\r\n").find(s[p]) == std::string_view::npos) ++p;
  return p;
}

std::size_t locate(const std::string& text, const json::json_pointer& ptr) {
  std::vector<std::string> tokens;
  for (json::json_pointer p = ptr; !p.empty(); p = p.parent_pointer()) tokens.push_back(p.back());
  std::reverse(tokens.begin(), tokens.end());

  std::size_t pos = skip_ws(text, 0);
  for (const auto& token : tokens) {
    if (pos >= text.size()) break;
    if (text[pos] == '{') {
      pos = skip_ws(text, pos + 1);
      bool found = false;
      while (pos < text.size() && text[pos] == '"') {
        const std::size_t end = skip_string(text, pos);
        const std::string key = json::parse(text.substr(pos, end - pos)).get<std::string>();
        pos = skip_ws(text, end);
        pos = skip_ws(text, pos + 1);  // ':'
        if (key == token) {
          found = true;
          break;
        }
        pos = skip_ws(text, skip_value(text, pos));
        if (pos < text.size() && text[pos] == ',') pos = skip_ws(text, pos + 1);
      }
      if (!found) break;
    } else if (text[pos] == '[') {
      pos = skip_ws(text, pos + 1);
      const long index = std::strtol(token.c_str(), nullptr, 10);
      for (long k = 0; k < index && pos < text.size(); ++k) {
        pos = skip_ws(text, skip_value(text, pos));
        if (pos < text.size() && text[pos] == ',') pos = skip_ws(text, pos + 1);
      }
    } else {
      break;
    }
  }
  return pos;
}

std::string line_col(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

// ---- typed access with anchored errors ------------------------------------

class Reader {
 public:
  Reader(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

  [[noreturn]] void fail(ErrorCategory category, const json::json_pointer& at, const std::string& what) const {
    const std::string where = at.empty() ? std::string("/") : at.to_string();
    throw Error(category, origin_ + ":" + line_col(text_, locate(text_, at)) + ": " + where + ": " + what);
  }

  const json& object(const json& j, const json::json_pointer& at, std::set<std::string> allowed) const {
    if (!j.is_object()) fail(ErrorCategory::Schema, at, "expected an object");
    for (const auto& [key, value] : j.items()) {
      if (!allowed.count(key)) fail(ErrorCategory::Schema, at / key, "unknown key");
    }
    return j;
  }

  double number(const json& j, const json::json_pointer& at) const {
    if (!j.is_number()) fail(ErrorCategory::Schema, at, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(ErrorCategory::Schema, at, "expected a finite number");
    return v;
  }

  int integer(const json& j, const json::json_pointer& at) const {
    if (!j.is_number_integer()) fail(ErrorCategory::Schema, at, "expected an integer");
    return j.get<int>();
  }

  bool boolean(const json& j, const json::json_pointer& at) const {
    if (!j.is_boolean()) fail(ErrorCategory::Schema, at, "expected true or false");
    return j.get<bool>();
  }

  std::string string(const json& j, const json::json_pointer& at) const {
    if (!j.is_string()) fail(ErrorCategory::Schema, at, "expected a string");
    return j.get<std::string>();
  }

  std::vector<double> numbers(const json& j, const json::json_pointer& at) const {
    if (!j.is_array()) fail(ErrorCategory::Schema, at, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], at / i));
    return out;
  }

  Vec3 vec3(const json& j, const json::json_pointer& at) const {
    const auto v = numbers(j, at);
    if (v.size() != 3) fail(ErrorCategory::Schema, at, "expected three components");
    return {v[0], v[1], v[2]};
  }

 private:
  const std::string& text_;
  std::string origin_;
};

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

json::json_pointer ptr(const std::string& s) { return json::json_pointer(s); }

ScenarioConfig parse_document(const json& root, const Reader& in) {
  ScenarioConfig cfg;
  in.object(root, ptr(""),
            {"name", "units", "atoms", "drive", "detuning", "detector", "grid", "collective", "sweep", "N",
             "omega0"});

  // Shorthand form for a single atom.
  if (find(root, "N")) {
    for (const char* key : {"atoms", "drive", "units"}) {
      if (find(root, key)) in.fail(ErrorCategory::Schema, ptr("/") / key, "not allowed together with \"N\"");
    }
    if (in.integer(root["N"], ptr("/N")) != 1) {
      in.fail(ErrorCategory::Invariant, ptr("/N"), "the shorthand form describes exactly one atom");
    }
    cfg.positions = {Vec3::Zero()};
    cfg.drive_mode = DriveMode::Uniform;
    if (auto v = find(root, "omega0")) cfg.omega0 = in.number(*v, ptr("/omega0"));
  } else if (find(root, "omega0")) {
    in.fail(ErrorCategory::Schema, ptr("/omega0"), "top-level omega0 is only valid with \"N\"; use drive.omega0");
  }

  if (auto v = find(root, "name")) cfg.name = in.string(*v, ptr("/name"));
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
    in.fail(ErrorCategory::Invariant, ptr("/name"), "name must be non-empty and contain no path separators");
  }

  double scale = 1.0;  // length unit in lambda0
  if (auto units = find(root, "units")) {
    in.object(*units, ptr("/units"), {"length", "lambda0_nm"});
    std::string length = "lambda0";
    if (auto v = find(*units, "length")) length = in.string(*v, ptr("/units/length"));
    if (length == "nm") {
      auto lam = find(*units, "lambda0_nm");
      if (!lam) in.fail(ErrorCategory::Units, ptr("/units"), "lengths in nm need lambda0_nm");
      cfg.lambda0_nm = in.number(*lam, ptr("/units/lambda0_nm"));
      if (!(cfg.lambda0_nm > 0.0)) in.fail(ErrorCategory::Units, ptr("/units/lambda0_nm"), "must be positive");
      scale = 1.0 / cfg.lambda0_nm;
    } else if (length == "lambda0") {
      if (auto lam = find(*units, "lambda0_nm")) {
        cfg.lambda0_nm = in.number(*lam, ptr("/units/lambda0_nm"));
        if (!(cfg.lambda0_nm > 0.0)) in.fail(ErrorCategory::Units, ptr("/units/lambda0_nm"), "must be positive");
      }
    } else {
      in.fail(ErrorCategory::Units, ptr("/units/length"), "unknown length unit '" + length + "'");
    }
  }

  if (auto atoms = find(root, "atoms")) {
    in.object(*atoms, ptr("/atoms"), {"positions", "dipole"});
    auto pos = find(*atoms, "positions");
    if (!pos) in.fail(ErrorCategory::Schema, ptr("/atoms"), "missing key \"positions\"");
    if (!pos->is_array() || pos->empty()) {
      in.fail(ErrorCategory::Schema, ptr("/atoms/positions"), "expected a non-empty array of 3-vectors");
    }
    for (std::size_t i = 0; i < pos->size(); ++i) {
      cfg.positions.push_back(scale * in.vec3((*pos)[i], ptr("/atoms/positions") / i));
    }
    if (auto d = find(*atoms, "dipole")) cfg.dipole = in.vec3(*d, ptr("/atoms/dipole"));
  } else if (!find(root, "N")) {
    in.fail(ErrorCategory::Schema, ptr(""), "missing key \"atoms\"");
  }

  if (auto drive = find(root, "drive")) {
    in.object(*drive, ptr("/drive"), {"mode", "omega0", "fwhm", "center", "beam_axis", "rabi"});
    std::string mode = "beam";
    if (auto v = find(*drive, "mode")) mode = in.string(*v, ptr("/drive/mode"));
    if (mode == "beam") {
      cfg.drive_mode = DriveMode::Beam;
    } else if (mode == "uniform") {
      cfg.drive_mode = DriveMode::Uniform;
    } else if (mode == "per_atom") {
      cfg.drive_mode = DriveMode::PerAtom;
    } else {
      in.fail(ErrorCategory::Schema, ptr("/drive/mode"), "expected beam, uniform or per_atom");
    }
    if (auto v = find(*drive, "omega0")) cfg.omega0 = in.number(*v, ptr("/drive/omega0"));
    if (auto v = find(*drive, "fwhm")) cfg.fwhm = scale * in.number(*v, ptr("/drive/fwhm"));
    if (auto v = find(*drive, "center")) cfg.center = scale * in.vec3(*v, ptr("/drive/center"));
    if (auto v = find(*drive, "beam_axis")) cfg.beam_axis = in.vec3(*v, ptr("/drive/beam_axis"));
    if (auto v = find(*drive, "rabi")) cfg.rabi = in.numbers(*v, ptr("/drive/rabi"));

    if (cfg.drive_mode == DriveMode::PerAtom) {
      if (!find(*drive, "rabi")) in.fail(ErrorCategory::Invariant, ptr("/drive"), "per_atom mode needs a rabi list");
      if (find(*drive, "omega0") || find(*drive, "fwhm") || find(*drive, "center")) {
        in.fail(ErrorCategory::Invariant, ptr("/drive"), "per_atom mode takes only the rabi list");
      }
      if (cfg.rabi.size() != cfg.positions.size()) {
        in.fail(ErrorCategory::Invariant, ptr("/drive/rabi"), "one Rabi frequency per atom is required");
      }
      for (std::size_t i = 0; i < cfg.rabi.size(); ++i) {
        if (cfg.rabi[i] < 0.0) in.fail(ErrorCategory::Invariant, ptr("/drive/rabi") / i, "must be >= 0");
      }
    } else {
      if (find(*drive, "rabi")) in.fail(ErrorCategory::Invariant, ptr("/drive/rabi"), "rabi list needs per_atom mode");
      if (cfg.drive_mode == DriveMode::Uniform && (find(*drive, "fwhm") || find(*drive, "center"))) {
        in.fail(ErrorCategory::Invariant, ptr("/drive"), "uniform mode ignores the beam profile; drop fwhm/center");
      }
    }
    if (cfg.omega0 < 0.0) in.fail(ErrorCategory::Invariant, ptr("/drive/omega0"), "must be >= 0");
    if (!(cfg.fwhm > 0.0)) in.fail(ErrorCategory::Invariant, ptr("/drive/fwhm"), "must be positive");
    if (std::abs(cfg.beam_axis.norm() - 1.0) > 1e-12) {
      in.fail(ErrorCategory::Invariant, ptr("/drive/beam_axis"), "must be a unit vector");
    }
  }

  if (auto v = find(root, "detuning")) cfg.detuning = in.number(*v, ptr("/detuning"));

  if (auto det = find(root, "detector")) {
    in.object(*det, ptr("/detector"), {"theta", "direction"});
    const auto* theta = find(*det, "theta");
    const auto* dir = find(*det, "direction");
    if ((theta != nullptr) == (dir != nullptr)) {
      in.fail(ErrorCategory::Invariant, ptr("/detector"), "give exactly one of theta or direction");
    }
    if (theta) {
      cfg.detector_theta = in.number(*theta, ptr("/detector/theta"));
      cfg.detector_direction = DetectorGeometry::in_plane(*cfg.detector_theta).direction();
    } else {
      cfg.detector_direction = in.vec3(*dir, ptr("/detector/direction"));
      if (std::abs(cfg.detector_direction.norm() - 1.0) > 1e-12) {
        in.fail(ErrorCategory::Invariant, ptr("/detector/direction"), "must be a unit vector");
      }
    }
  }

  if (auto grid = find(root, "grid")) {
    in.object(*grid, ptr("/grid"), {"width", "points"});
    if (auto v = find(*grid, "width")) cfg.grid_width = in.number(*v, ptr("/grid/width"));
    if (auto v = find(*grid, "points")) cfg.grid_points = in.integer(*v, ptr("/grid/points"));
    if (cfg.grid_width < 0.0) in.fail(ErrorCategory::Invariant, ptr("/grid/width"), "must be >= 0 (0 = automatic)");
    if (cfg.grid_points < 3 || cfg.grid_points % 2 == 0) {
      in.fail(ErrorCategory::Invariant, ptr("/grid/points"), "must be odd and at least 3");
    }
  }

  if (auto coll = find(root, "collective")) {
    in.object(*coll, ptr("/collective"), {"zero", "uniform"});
    if (auto v = find(*coll, "zero")) cfg.zero_collective = in.boolean(*v, ptr("/collective/zero"));
    if (auto v = find(*coll, "uniform"); v && !v->is_null()) {
      const auto jg = in.numbers(*v, ptr("/collective/uniform"));
      if (jg.size() != 2) in.fail(ErrorCategory::Schema, ptr("/collective/uniform"), "expected [J, Gamma]");
      cfg.uniform_couplings = std::make_pair(jg[0], jg[1]);
    }
    if (cfg.zero_collective && cfg.uniform_couplings) {
      in.fail(ErrorCategory::Invariant, ptr("/collective"), "zero and uniform are mutually exclusive");
    }
  }

  if (auto sw = find(root, "sweep")) {
    in.object(*sw, ptr("/sweep"), {"ratios", "omega1"});
    SweepSpec spec;
    if (auto v = find(*sw, "ratios")) {
      const auto r = in.numbers(*v, ptr("/sweep/ratios"));
      if (r.size() != 3 || r[2] != std::floor(r[2])) {
        in.fail(ErrorCategory::Schema, ptr("/sweep/ratios"), "expected [start, stop, count]");
      }
      spec.start = r[0];
      spec.stop = r[1];
      spec.count = static_cast<int>(r[2]);
    }
    if (auto v = find(*sw, "omega1")) spec.omega1 = in.numbers(*v, ptr("/sweep/omega1"));
    try {
      (void)spec.ratios();
    } catch (const Error& e) {
      in.fail(ErrorCategory::Invariant, ptr("/sweep/ratios"), e.what());
    }
    cfg.sweep = spec;
  }

  try {
    (void)cfg.resolve();
  } catch (const Error& e) {
    in.fail(ErrorCategory::Invariant, ptr(""), e.what());
  }
  return cfg;
}

nlohmann::ordered_json vec_json(const Vec3& v) { return nlohmann::ordered_json::array({v.x(), v.y(), v.z()}); }

}  // namespace

std::vector<double> SweepSpec::ratios() const {
  if (count < 1) throw Error(ErrorCategory::Invariant, "sweep needs at least one ratio");
  if (!(start >= 0.0 && stop <= 1.0 && start <= stop)) {
    throw Error(ErrorCategory::Invariant, "sweep ratios must satisfy 0 <= start <= stop <= 1");
  }
  if (count == 1) return {start};
  if (start == stop) throw Error(ErrorCategory::Invariant, "sweep with several points needs start < stop");
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = start + (stop - start) * k / (count - 1);
  out.back() = stop;
  return out;
}

Scenario ScenarioConfig::resolve() const {
  try {
    AtomEnsemble ensemble(positions, dipole);
    DriveField drive;
    drive.omega0 = omega0;
    drive.fwhm = fwhm;
    drive.center = center;
    drive.detuning = detuning;
    drive.beam_axis = beam_axis;
    drive.uniform = drive_mode != DriveMode::Beam;
    ModelOptions options;
    options.zero_collective = zero_collective;
    options.uniform_couplings = uniform_couplings;
    if (drive_mode == DriveMode::PerAtom) options.rabi_override = rabi;
    if (drive_mode == DriveMode::Beam) ensemble.require_coplanar(beam_axis);
    drive.validate();
    if (grid_points < 3 || grid_points % 2 == 0) {
      throw Error(ErrorCategory::Invariant, "grid points must be odd and at least 3");
    }
    const DetectorGeometry detector = detector_theta ? DetectorGeometry::in_plane(*detector_theta)
                                                     : DetectorGeometry(detector_direction);
    return Scenario{name, std::move(ensemble), drive, options, detector, grid_width, grid_points};
  } catch (const Error& e) {
    throw Error(ErrorCategory::Invariant, e.what());
  }
}

ScenarioConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCategory::Schema, origin + ":" + line_col(text, e.byte > 0 ? e.byte - 1 : 0) +
                                           ": not valid JSON (" + e.what() + ")");
  }
  return parse_document(root, Reader(text, origin));
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::Io, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

nlohmann::ordered_json to_json(const ScenarioConfig& c) {
  using ojson = nlohmann::ordered_json;
  ojson j;
  j["name"] = c.name;
  j["units"] = {{"length", "lambda0"}, {"lambda0_nm", c.lambda0_nm}};
  ojson positions = ojson::array();
  for (const auto& p : c.positions) positions.push_back(vec_json(p));
  j["atoms"] = {{"positions", positions}, {"dipole", vec_json(c.dipole)}};

  ojson drive;
  switch (c.drive_mode) {
    case DriveMode::Beam:
      drive["mode"] = "beam";
      drive["omega0"] = c.omega0;
      drive["fwhm"] = c.fwhm;
      drive["center"] = vec_json(c.center);
      break;
    case DriveMode::Uniform:
      drive["mode"] = "uniform";
      drive["omega0"] = c.omega0;
      break;
    case DriveMode::PerAtom:
      drive["mode"] = "per_atom";
      drive["rabi"] = c.rabi;
      break;
  }
  drive["beam_axis"] = vec_json(c.beam_axis);
  j["drive"] = drive;
  j["detuning"] = c.detuning;
  if (c.detector_theta) {
    j["detector"] = {{"theta", *c.detector_theta}};
  } else {
    j["detector"] = {{"direction", vec_json(c.detector_direction)}};
  }
  j["grid"] = {{"width", c.grid_width}, {"points", c.grid_points}};
  ojson coll;
  coll["zero"] = c.zero_collective;
  if (c.uniform_couplings) {
    coll["uniform"] = {c.uniform_couplings->first, c.uniform_couplings->second};
  } else {
    coll["uniform"] = nullptr;
  }
  j["collective"] = coll;
  if (c.sweep) {
    j["sweep"] = {{"ratios", {c.sweep->start, c.sweep->stop, c.sweep->count}}, {"omega1", c.sweep->omega1}};
  }
  return j;
}

// ---- presets ------------------------------------------------------------------

namespace {

ScenarioConfig lattice_preset(std::string name, double spacing_nm, double fwhm_nm, double omega0,
                              std::vector<Vec3> sites) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.lambda0_nm = kDefaultLambdaNm;
  const double a = spacing_nm / kDefaultLambdaNm;
  for (const auto& s : sites) c.positions.push_back(a * s);
  c.dipole = Vec3::UnitZ();
  c.drive_mode = DriveMode::Beam;
  c.omega0 = omega0;
  c.fwhm = fwhm_nm / kDefaultLambdaNm;
  c.center = c.positions.front();
  c.detuning = 1.0;
  return c;
}

ScenarioConfig fig3(std::string name, std::vector<Vec3> sites) {
  auto c = lattice_preset(std::move(name), 640.0, 600.0, 0.1, std::move(sites));
  c.detector_theta = 0.92;
  c.detector_direction = DetectorGeometry::in_plane(0.92).direction();
  return c;
}

ScenarioConfig fig4b(std::string name, std::vector<Vec3> sites) {
  auto c = lattice_preset(std::move(name), 532.0, 700.0, 0.5, std::move(sites));
  c.detector_direction = Vec3::UnitY();
  return c;
}

const std::vector<Vec3> kPair = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
const std::vector<Vec3> kLine = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(-1, 0, 0)};
const std::vector<Vec3> kCross = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0)};

std::vector<Vec3> diagonal(std::vector<Vec3> sites) {
  for (auto& s : sites) s *= std::sqrt(2.0);
  return sites;
}

const std::map<std::string, ScenarioConfig (*)()> kPresets = {
    {"mollow1",
     [] {
       ScenarioConfig c;
       c.name = "mollow1";
       c.positions = {Vec3::Zero()};
       c.drive_mode = DriveMode::Uniform;
       c.omega0 = 0.1;
       c.detuning = 1.0;
       return c;
     }},
    {"fig3a_addressed", [] { return fig3("fig3a_addressed", kPair); }},
    {"fig3a_no_collective",
     [] {
       auto c = fig3("fig3a_no_collective", kPair);
       c.zero_collective = true;
       return c;
     }},
    {"fig3a_equal_drive",
     [] {
       auto c = fig3("fig3a_equal_drive", kPair);
       c.drive_mode = DriveMode::Uniform;
       c.fwhm = 1.0;
       c.center = Vec3::Zero();
       return c;
     }},
    {"fig3b_sweep",
     [] {
       auto c = fig3("fig3b_sweep", kPair);
       c.sweep = SweepSpec{0.0, 1.0, 21, {0.1}};
       return c;
     }},
    {"fig4a_1d", [] { return fig3("fig4a_1d", kLine); }},
    {"fig4a_2d", [] { return fig3("fig4a_2d", kCross); }},
    {"fig4b_2atom", [] { return fig4b("fig4b_2atom", diagonal(kPair)); }},
    {"fig4b_3atom", [] { return fig4b("fig4b_3atom", diagonal(kLine)); }},
    {"fig4b_5atom", [] { return fig4b("fig4b_5atom", diagonal(kCross)); }},
};

}  // namespace

ScenarioConfig expand_preset(const std::string& id) {
  auto it = kPresets.find(id);
  if (it == kPresets.end()) throw Error(ErrorCategory::Domain, "unknown preset '" + id + "'");
  return it->second();
}

std::vector<std::string> list_presets() {
  return {"mollow1",  "fig3a_addressed", "fig3a_no_collective", "fig3a_equal_drive", "fig3b_sweep",
          "fig4a_1d", "fig4a_2d",        "fig4b_2atom",         "fig4b_3atom",       "fig4b_5atom"};
}

}  // namespace resfluor
