#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvmag/analysis.hpp"
#include "nvmag/cavity.hpp"
#include "nvmag/lockin.hpp"
#include "nvmag/sensing.hpp"
#include "nvmag/spin_model.hpp"
#include "nvmag/trace.hpp"

namespace nvmag {

// Configuration is flat sectioned text (INI) or an equivalent JSON
// object. Every physical key carries its unit in the name; unknown keys
// and missing required keys are rejected at load time.

struct RunMeta {
  std::string id = "run";
  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

struct DriveSection {
  double gamma_p_mhz = 0;
  double omega_rabi_mhz = 0;
  double omega_c_mhz = 0;
  double omega_0_mhz = 0;
  bool three_tone = true;
  double v0_volts = 1.0;

  DriveConfig make_drive(double a_par_mhz) const;
};

struct GridSection {
  double span_mhz = 12.0;  // grid covers omega_0 +- span/2
  int points = 801;

  std::vector<double> make_grid(double center_mhz) const;
};

struct LockinSection {
  double gain_g = 5000.0;
  bool extended_truncation = false;

  double prefactor_a() const { return 10.0 * gain_g; }
  SidebandTruncation truncation() const {
    return extended_truncation ? SidebandTruncation::full_beta
                               : SidebandTruncation::half_beta;
  }
};

struct CavitySection {
  CavityConfig cavity;
  double alpha_background_per_mm = 0.03;
  double sigma_nv_mm2 = 3.1e-15;
  double epsilon_khz_per_mw = 0.3;
  double p_in_w = 0.87;
  double excitation_volume_mm3 = 3.5e-2;
};

struct NoiseSection {
  double emitter_count = 1e9;
  double collection_efficiency = 0.02;
  double per_emitter_rate_mhz = 46.802;
  double quantum_efficiency = 0.7;
  double load_ohm = 1e4;
  double lockin_input_nv_per_rthz = 7.0;
  double detector_load_nv_per_rthz = 13.0;
  NoiseCombination combination = NoiseCombination::linear;

  double detected_photon_rate_hz() const {
    return emitter_count * collection_efficiency * per_emitter_rate_mhz * 1e6;
  }
};

struct SweepSection {
  double omega_min_mhz = 0.1;
  double omega_max_mhz = 10.0;
  int omega_points = 21;
  double gamma_p_min_mhz = 0.05;
  double gamma_p_max_mhz = 10.0;
  int gamma_p_points = 21;
  bool log_spacing = true;

  std::vector<double> omega_axis() const;
  std::vector<double> gamma_p_axis() const;
};

struct ScenarioSection {
  FieldScenario scenario;
  double duration_s = 250.0;
};

struct AnalysisSection {
  std::size_t segment_len = 16384;
  double overlap_fraction = 0.5;
  int sg_window = 11;
  int sg_order = 3;
};

struct RunConfig {
  RunMeta run;
  std::optional<SpinModelParams> spin_model;
  std::optional<DriveSection> drive;
  std::optional<ModulationConfig> modulation;
  std::optional<LockinSection> lockin;
  std::optional<GridSection> grid;
  std::optional<CavitySection> cavity;
  std::optional<NoiseSection> noise;
  std::optional<SweepSection> sweep;
  std::optional<ScenarioSection> scenario;
  std::optional<SensorOperatingPoint> op_point;
  std::optional<AnalysisSection> analysis;

  std::string config_hash;  // FNV-1a of the raw file bytes

  // Throws ValidationError naming the section when absent.
  const SpinModelParams& need_spin_model() const;
  const DriveSection& need_drive() const;
  const ModulationConfig& need_modulation() const;
  const LockinSection& need_lockin() const;
  const GridSection& need_grid() const;
  const CavitySection& need_cavity() const;
  const NoiseSection& need_noise() const;
  const SweepSection& need_sweep() const;
  const ScenarioSection& need_scenario() const;
  const SensorOperatingPoint& need_op_point() const;
  const AnalysisSection& need_analysis() const;
};

// Reads .ini or .json (detected by extension, falling back to a leading
// '{' sniff).
RunConfig load_config(const std::string& path);

// Parses from text; `as_json` selects the parser.
RunConfig parse_config(const std::string& text, bool as_json);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace nvmag
