#include "nvmag/sensing.hpp"

#include <algorithm>
#include <cmath>

#include "nvmag/errors.hpp"
#include "nvmag/units.hpp"

namespace nvmag {

namespace {

// Frequency grid for one sweep cell, centered on the resonance and wide
// enough to contain the steepest features at this drive strength.
std::vector<double> cell_grid(const SpinModelParams& params,
                              const DriveConfig& drive, double m_depth_mhz,
                              int points, double v0) {
  const auto comps = resonance_components(params, drive, v0);
  double gmax = 0.0;
  for (const auto& c : comps) gmax = std::max(gmax, c.hwhm_mhz);
  const double span =
      2.0 * params.a_par_mhz + m_depth_mhz + 6.0 * gmax;
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = drive.omega_0_mhz - span +
              2.0 * span * i / static_cast<double>(points - 1);
  }
  return grid;
}

}  // namespace

SlopeSurface sweep_slope(const SpinModelParams& params,
                         const std::vector<double>& omega_grid_mhz,
                         const std::vector<double>& gamma_p_grid_mhz,
                         const ModulationConfig& mod, double gain_a,
                         double v0_volts, const SweepOptions& opts) {
  if (omega_grid_mhz.empty() || gamma_p_grid_mhz.empty()) {
    throw ValidationError("sweep_slope: empty axis");
  }
  params.validate();

  SlopeSurface surface;
  surface.omega_axis_mhz = omega_grid_mhz;
  surface.gamma_p_axis_mhz = gamma_p_grid_mhz;
  surface.slopes_v_per_mhz.resize(gamma_p_grid_mhz.size());

  for (std::size_t i = 0; i < gamma_p_grid_mhz.size(); ++i) {
    auto& row = surface.slopes_v_per_mhz[i];
    row.resize(omega_grid_mhz.size());
    for (std::size_t j = 0; j < omega_grid_mhz.size(); ++j) {
      DriveConfig drive;
      drive.gamma_p_mhz = gamma_p_grid_mhz[i];
      drive.omega_rabi_mhz = omega_grid_mhz[j];
      drive.omega_0_mhz = 0.0;
      drive.omega_c_mhz = 0.0;
      drive.tones = opts.three_tone ? three_tone_drive(0.0, params.a_par_mhz)
                                    : std::vector<double>{0.0};
      const auto grid = cell_grid(params, drive, mod.m_depth_mhz,
                                  opts.spectrum_points, v0_volts);
      const Spectrum sli = lockin_spectrum(params, drive, mod, grid, gain_a,
                                           v0_volts, opts.truncation);
      row[j] = max_slope(sli).slope_v_per_mhz;
    }
  }
  return surface;
}

double shot_noise_v_per_rthz(double photon_rate_hz, double quantum_efficiency,
                             double load_ohm) {
  if (!(quantum_efficiency > 0) || !(load_ohm > 0) || photon_rate_hz < 0) {
    throw ValidationError("shot_noise: factors must be positive");
  }
  const double current_a =
      photon_rate_hz * quantum_efficiency * units::electron_charge_c;
  return std::sqrt(2.0 * units::electron_charge_c * current_a) * load_ohm;
}

NoiseBudget noise_budget(double shot_v, double lockin_input_v,
                         double detector_load_v, NoiseCombination mode) {
  if (shot_v < 0 || lockin_input_v < 0 || detector_load_v < 0) {
    throw ValidationError("noise_budget: components must be >= 0");
  }
  NoiseBudget budget;
  budget.shot_v = shot_v;
  budget.lockin_input_v = lockin_input_v;
  budget.detector_load_v = detector_load_v;
  budget.mode = mode;
  if (mode == NoiseCombination::linear) {
    budget.total_v = shot_v + lockin_input_v + detector_load_v;
  } else {
    budget.total_v = std::sqrt(shot_v * shot_v + lockin_input_v * lockin_input_v +
                               detector_load_v * detector_load_v);
  }
  return budget;
}

double sensitivity_t_per_rthz(double max_slope_v_per_mhz,
                              double noise_total_v_per_rthz, double gain_a,
                              double gamma_e_mhz_per_mt) {
  if (!(max_slope_v_per_mhz > 0)) {
    throw NumericalError("sensitivity: zero slope, sensitivity undefined");
  }
  if (!(gamma_e_mhz_per_mt > 0) || !(gain_a > 0)) {
    throw ValidationError("sensitivity: gain and gamma_e must be positive");
  }
  const double slope_v_per_hz =
      units::v_per_mhz_to_v_per_hz(max_slope_v_per_mhz);
  const double gamma_hz_per_t =
      units::mhz_per_mt_to_hz_per_t(gamma_e_mhz_per_mt);
  return gain_a * noise_total_v_per_rthz / (slope_v_per_hz * gamma_hz_per_t);
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0) || !(hi > lo) || points < 2) {
    throw ValidationError("log_grid: need 0 < lo < hi and >= 2 points");
  }
  std::vector<double> g(points);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (int i = 0; i < points; ++i) {
    g[i] = std::exp(llo + (lhi - llo) * i / static_cast<double>(points - 1));
  }
  return g;
}

}  // namespace nvmag
