#include "nvmag/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "nvmag/errors.hpp"

namespace nvmag {

namespace {

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

SectionMap parse_ini_sections(const std::string& text) {
  SectionMap sections;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ValidationError("config line " + std::to_string(lineno) +
                              ": unterminated section header");
      }
      current = trim(t.substr(1, t.size() - 2));
      sections[current];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) +
                            ": expected key = value");
    }
    if (current.empty()) {
      throw ValidationError("config line " + std::to_string(lineno) +
                            ": key outside any section");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (!sections[current].emplace(key, value).second) {
      throw ValidationError("config: duplicate key '" + key + "' in [" +
                            current + "]");
    }
  }
  return sections;
}

SectionMap parse_json_sections(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ValidationError("config: JSON root must be an object of sections");
  }
  SectionMap sections;
  for (const auto& [section, body] : j.items()) {
    if (!body.is_object()) {
      throw ValidationError("config: section '" + section +
                            "' must be an object");
    }
    for (const auto& [key, value] : body.items()) {
      std::string text_value;
      if (value.is_string()) {
        text_value = value.get<std::string>();
      } else if (value.is_array()) {
        std::string joined;
        for (const auto& item : value) {
          if (!joined.empty()) joined += ",";
          joined += item.is_string() ? item.get<std::string>() : item.dump();
        }
        text_value = joined;
      } else {
        text_value = value.dump();
      }
      sections[section][key] = text_value;
    }
  }
  return sections;
}

// Typed access with consumption tracking, so leftover keys are reported
// as unknown.
class Section {
 public:
  Section(std::string name, std::map<std::string, std::string> kv)
      : name_(std::move(name)), kv_(std::move(kv)) {}

  double number(const std::string& key) {
    return parse_number(key, require(key));
  }
  double number_or(const std::string& key, double fallback) {
    auto v = take(key);
    return v ? parse_number(key, *v) : fallback;
  }
  std::uint64_t uint_or(const std::string& key, std::uint64_t fallback) {
    auto v = take(key);
    if (!v) return fallback;
    try {
      return std::stoull(*v);
    } catch (...) {
      throw ValidationError("config: [" + name_ + "] " + key +
                            " must be an unsigned integer");
    }
  }
  int int_or(const std::string& key, int fallback) {
    auto v = take(key);
    if (!v) return fallback;
    try {
      return std::stoi(*v);
    } catch (...) {
      throw ValidationError("config: [" + name_ + "] " + key +
                            " must be an integer");
    }
  }
  bool bool_or(const std::string& key, bool fallback) {
    auto v = take(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ValidationError("config: [" + name_ + "] " + key +
                          " must be true or false");
  }
  std::string string_or(const std::string& key, const std::string& fallback) {
    auto v = take(key);
    return v ? *v : fallback;
  }
  std::vector<double> list_or(const std::string& key,
                              std::vector<double> fallback) {
    auto v = take(key);
    if (!v) return fallback;
    std::vector<double> out;
    if (trim(*v).empty()) return out;
    std::istringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) {
      out.push_back(parse_number(key, trim(item)));
    }
    return out;
  }

  void finish() const {
    if (!kv_.empty()) {
      throw ValidationError("config: unknown key '" + kv_.begin()->first +
                            "' in [" + name_ + "]");
    }
  }

 private:
  std::optional<std::string> take(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    std::string v = it->second;
    kv_.erase(it);
    return v;
  }
  std::string require(const std::string& key) {
    auto v = take(key);
    if (!v) {
      throw ValidationError("config: missing required key '" + key +
                            "' in [" + name_ + "]");
    }
    return *v;
  }
  double parse_number(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (...) {
      throw ValidationError("config: [" + name_ + "] " + key +
                            " must be a number, got '" + v + "'");
    }
  }

  std::string name_;
  std::map<std::string, std::string> kv_;
};

std::vector<double> spaced_axis(double lo, double hi, int points, bool log) {
  if (points < 1) throw ValidationError("config: axis needs >= 1 point");
  if (points == 1) return {lo};
  if (log) return log_grid(lo, hi, points);
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) {
    g[i] = lo + (hi - lo) * i / static_cast<double>(points - 1);
  }
  return g;
}

}  // namespace

DriveConfig DriveSection::make_drive(double a_par_mhz) const {
  DriveConfig d;
  d.gamma_p_mhz = gamma_p_mhz;
  d.omega_rabi_mhz = omega_rabi_mhz;
  d.omega_c_mhz = omega_c_mhz;
  d.omega_0_mhz = omega_0_mhz;
  d.tones = three_tone ? three_tone_drive(omega_c_mhz, a_par_mhz)
                       : std::vector<double>{0.0};
  return d;
}

std::vector<double> GridSection::make_grid(double center_mhz) const {
  if (points < 3 || !(span_mhz > 0)) {
    throw ValidationError("config: [grid] needs span > 0 and >= 3 points");
  }
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) {
    g[i] = center_mhz - span_mhz / 2.0 +
           span_mhz * i / static_cast<double>(points - 1);
  }
  return g;
}

std::vector<double> SweepSection::omega_axis() const {
  return spaced_axis(omega_min_mhz, omega_max_mhz, omega_points, log_spacing);
}

std::vector<double> SweepSection::gamma_p_axis() const {
  return spaced_axis(gamma_p_min_mhz, gamma_p_max_mhz, gamma_p_points,
                     log_spacing);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& text, bool as_json) {
  const SectionMap sections =
      as_json ? parse_json_sections(text) : parse_ini_sections(text);

  static const char* known[] = {"run",    "spin_model", "drive",    "modulation",
                                "lockin", "grid",       "cavity",   "noise",
                                "sweep",  "scenario",   "op_point", "analysis"};
  for (const auto& [name, kv] : sections) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
          return name == k;
        }) == std::end(known)) {
      throw ValidationError("config: unknown section [" + name + "]");
    }
  }

  RunConfig cfg;
  cfg.config_hash = fnv1a_hex(text);

  auto section = [&](const char* name) -> std::optional<Section> {
    auto it = sections.find(name);
    if (it == sections.end()) return std::nullopt;
    return Section(name, it->second);
  };

  if (auto s = section("run")) {
    cfg.run.id = s->string_or("id", cfg.run.id);
    cfg.run.seed = s->uint_or("seed", cfg.run.seed);
    cfg.run.out_dir = s->string_or("out_dir", cfg.run.out_dir);
    s->finish();
  }

  if (auto s = section("spin_model")) {
    SpinModelParams p{};
    p.k_r_mhz = s->number("k_r_mhz");
    p.k_isc0_mhz = s->number("k_isc0_mhz");
    p.k_isc1_mhz = s->number("k_isc1_mhz");
    p.k_s0_mhz = s->number("k_s0_mhz");
    p.k_s1_mhz = s->number("k_s1_mhz");
    p.t1_spin_ms = s->number("t1_spin_ms");
    p.t2_star_us = s->number("t2_star_us");
    p.a_par_mhz = s->number_or("a_par_mhz", 2.16);
    p.gamma_e_mhz_per_mt = s->number_or("gamma_e_mhz_per_mt", 28.0);
    s->finish();
    p.validate();
    cfg.spin_model = p;
  }

  if (auto s = section("drive")) {
    DriveSection d;
    d.gamma_p_mhz = s->number("gamma_p_mhz");
    d.omega_rabi_mhz = s->number("omega_rabi_mhz");
    d.omega_c_mhz = s->number("omega_c_mhz");
    d.omega_0_mhz = s->number("omega_0_mhz");
    d.three_tone = s->bool_or("three_tone", true);
    d.v0_volts = s->number("v0_volts");
    s->finish();
    if (!(d.v0_volts > 0)) {
      throw ValidationError("config: [drive] v0_volts must be positive");
    }
    cfg.drive = d;
  }

  if (auto s = section("modulation")) {
    ModulationConfig m;
    m.nu_khz = s->number_or("nu_khz", 30.0);
    m.m_depth_mhz = s->number_or("m_depth_mhz", 0.5);
    m.n_max = s->int_or("n_max", -1);
    s->finish();
    m.validate();
    cfg.modulation = m;
  }

  if (auto s = section("lockin")) {
    LockinSection l;
    l.gain_g = s->number_or("gain_g", 5000.0);
    l.extended_truncation = s->bool_or("extended_truncation", false);
    s->finish();
    if (!(l.gain_g > 0)) {
      throw ValidationError("config: [lockin] gain_g must be positive");
    }
    cfg.lockin = l;
  }

  if (auto s = section("grid")) {
    GridSection g;
    g.span_mhz = s->number_or("span_mhz", 12.0);
    g.points = s->int_or("points", 801);
    s->finish();
    cfg.grid = g;
  }

  if (auto s = section("cavity")) {
    CavitySection c;
    c.cavity.r1 = s->number("r1");
    c.cavity.r2 = s->number("r2");
    c.cavity.finesse_empty = s->number("finesse_empty");
    c.cavity.finesse_loaded = s->number("finesse_loaded");
    c.cavity.path_len_mm = s->number("path_len_mm");
    c.cavity.reflection_fraction = s->number_or("reflection_fraction", 0.006);
    c.cavity.s_polarized_fraction = s->number_or("s_polarized_fraction", 0.8);
    const std::string conv = s->string_or("convention", "intensity");
    if (conv == "intensity") {
      c.cavity.convention = LossConvention::intensity;
    } else if (conv == "amplitude") {
      c.cavity.convention = LossConvention::amplitude;
    } else {
      throw ValidationError(
          "config: [cavity] convention must be intensity or amplitude");
    }
    c.alpha_background_per_mm = s->number_or("alpha_background_per_mm", 0.03);
    c.sigma_nv_mm2 = s->number_or("sigma_nv_mm2", 3.1e-15);
    c.epsilon_khz_per_mw = s->number_or("epsilon_khz_per_mw", 0.3);
    c.p_in_w = s->number_or("p_in_w", 0.87);
    c.excitation_volume_mm3 = s->number_or("excitation_volume_mm3", 3.5e-2);
    s->finish();
    c.cavity.validate();
    cfg.cavity = c;
  }

  if (auto s = section("noise")) {
    NoiseSection n;
    n.emitter_count = s->number_or("emitter_count", n.emitter_count);
    n.collection_efficiency =
        s->number_or("collection_efficiency", n.collection_efficiency);
    n.per_emitter_rate_mhz =
        s->number_or("per_emitter_rate_mhz", n.per_emitter_rate_mhz);
    n.quantum_efficiency =
        s->number_or("quantum_efficiency", n.quantum_efficiency);
    n.load_ohm = s->number_or("load_ohm", n.load_ohm);
    n.lockin_input_nv_per_rthz =
        s->number_or("lockin_input_nv_per_rthz", n.lockin_input_nv_per_rthz);
    n.detector_load_nv_per_rthz =
        s->number_or("detector_load_nv_per_rthz", n.detector_load_nv_per_rthz);
    const std::string mode = s->string_or("combination", "linear");
    if (mode == "linear") {
      n.combination = NoiseCombination::linear;
    } else if (mode == "quadrature") {
      n.combination = NoiseCombination::quadrature;
    } else {
      throw ValidationError(
          "config: [noise] combination must be linear or quadrature");
    }
    s->finish();
    cfg.noise = n;
  }

  if (auto s = section("sweep")) {
    SweepSection w;
    w.omega_min_mhz = s->number_or("omega_min_mhz", w.omega_min_mhz);
    w.omega_max_mhz = s->number_or("omega_max_mhz", w.omega_max_mhz);
    w.omega_points = s->int_or("omega_points", w.omega_points);
    w.gamma_p_min_mhz = s->number_or("gamma_p_min_mhz", w.gamma_p_min_mhz);
    w.gamma_p_max_mhz = s->number_or("gamma_p_max_mhz", w.gamma_p_max_mhz);
    w.gamma_p_points = s->int_or("gamma_p_points", w.gamma_p_points);
    const std::string spacing = s->string_or("spacing", "log");
    if (spacing == "log") {
      w.log_spacing = true;
    } else if (spacing == "linear") {
      w.log_spacing = false;
    } else {
      throw ValidationError("config: [sweep] spacing must be log or linear");
    }
    s->finish();
    cfg.sweep = w;
  }

  if (auto s = section("scenario")) {
    ScenarioSection sc;
    const auto freqs = s->list_or("tone_freqs_hz", {});
    const auto amps = s->list_or("tone_amps_t", {});
    auto phases = s->list_or("tone_phases_rad", {});
    if (freqs.size() != amps.size()) {
      throw ValidationError(
          "config: [scenario] tone_freqs_hz and tone_amps_t lengths differ");
    }
    if (phases.empty()) phases.assign(freqs.size(), 0.0);
    if (phases.size() != freqs.size()) {
      throw ValidationError(
          "config: [scenario] tone_phases_rad length mismatch");
    }
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      sc.scenario.tones.push_back({freqs[i], amps[i], phases[i]});
    }
    sc.scenario.hum.fundamental_hz = s->number_or("hum_fundamental_hz", 50.0);
    sc.scenario.hum.odd_harmonic_amps_t = s->list_or("hum_odd_amps_t", {});
    sc.scenario.white_noise_t_per_rthz =
        s->number_or("white_noise_t_per_rthz", 0.0);
    sc.scenario.drift_t_per_rts = s->number_or("drift_t_per_rts", 0.0);
    sc.scenario.temp_drift_k_per_s = s->number_or("temp_drift_k_per_s", 0.0);
    sc.duration_s = s->number_or("duration_s", 250.0);
    s->finish();
    sc.scenario.validate();
    if (!(sc.duration_s > 0)) {
      throw ValidationError("config: [scenario] duration_s must be positive");
    }
    cfg.scenario = sc;
  }

  if (auto s = section("op_point")) {
    SensorOperatingPoint op;
    op.slope_v_per_mhz = s->number("slope_v_per_mhz");
    op.gamma_e_mhz_per_mt = s->number_or("gamma_e_mhz_per_mt", 28.0);
    op.corner_freq_hz = s->number_or("corner_freq_hz", 159.0);
    op.sample_rate_hz = s->number_or("sample_rate_hz", 2000.0);
    op.electronic_noise_v_per_rthz =
        s->number_or("electronic_noise_v_per_rthz", 0.0);
    op.linewidth_mhz = s->number_or("linewidth_mhz", 0.0);
    s->finish();
    op.seed = cfg.run.seed;
    op.validate();
    cfg.op_point = op;
  }

  if (auto s = section("analysis")) {
    AnalysisSection a;
    a.segment_len =
        static_cast<std::size_t>(s->uint_or("segment_len", a.segment_len));
    a.overlap_fraction = s->number_or("overlap_fraction", a.overlap_fraction);
    a.sg_window = s->int_or("sg_window", a.sg_window);
    a.sg_order = s->int_or("sg_order", a.sg_order);
    s->finish();
    cfg.analysis = a;
  }

  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("config: cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  bool as_json = path.size() > 5 && path.substr(path.size() - 5) == ".json";
  if (!as_json) {
    const std::string t = trim(text);
    as_json = !t.empty() && t.front() == '{';
  }
  return parse_config(text, as_json);
}

namespace {
[[noreturn]] void missing_section(const char* name) {
  throw ValidationError(std::string("config: missing required section [") +
                        name + "]");
}
}  // namespace

const SpinModelParams& RunConfig::need_spin_model() const {
  if (!spin_model) missing_section("spin_model");
  return *spin_model;
}
const DriveSection& RunConfig::need_drive() const {
  if (!drive) missing_section("drive");
  return *drive;
}
const ModulationConfig& RunConfig::need_modulation() const {
  if (!modulation) missing_section("modulation");
  return *modulation;
}
const LockinSection& RunConfig::need_lockin() const {
  if (!lockin) missing_section("lockin");
  return *lockin;
}
const GridSection& RunConfig::need_grid() const {
  if (!grid) missing_section("grid");
  return *grid;
}
const CavitySection& RunConfig::need_cavity() const {
  if (!cavity) missing_section("cavity");
  return *cavity;
}
const NoiseSection& RunConfig::need_noise() const {
  if (!noise) missing_section("noise");
  return *noise;
}
const SweepSection& RunConfig::need_sweep() const {
  if (!sweep) missing_section("sweep");
  return *sweep;
}
const ScenarioSection& RunConfig::need_scenario() const {
  if (!scenario) missing_section("scenario");
  return *scenario;
}
const SensorOperatingPoint& RunConfig::need_op_point() const {
  if (!op_point) missing_section("op_point");
  return *op_point;
}
const AnalysisSection& RunConfig::need_analysis() const {
  if (!analysis) missing_section("analysis");
  return *analysis;
}

}  // namespace nvmag
