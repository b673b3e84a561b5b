#pragma once

#include <vector>

#include "nvmag/lockin.hpp"
#include "nvmag/spin_model.hpp"

namespace nvmag {

// Maximum lock-in slope over the (Rabi frequency, pump rate) plane.
// slopes[i][j] belongs to gamma_p_axis[i] and omega_axis[j].
struct SlopeSurface {
  std::vector<double> omega_axis_mhz;
  std::vector<double> gamma_p_axis_mhz;
  std::vector<std::vector<double>> slopes_v_per_mhz;
};

struct SweepOptions {
  bool three_tone = true;
  int spectrum_points = 401;
  SidebandTruncation truncation = SidebandTruncation::half_beta;
};

// Evaluates max_slope of the lock-in spectrum for every grid pair. Cells
// are independent; results are assembled in index order, so the output
// is identical regardless of evaluation order.
SlopeSurface sweep_slope(const SpinModelParams& params,
                         const std::vector<double>& omega_grid_mhz,
                         const std::vector<double>& gamma_p_grid_mhz,
                         const ModulationConfig& mod, double gain_a,
                         double v0_volts, const SweepOptions& opts = {});

// Shot-noise voltage density across the detector load: photon rate ->
// photocurrent (quantum_efficiency electrons per photon) -> sqrt(2 e I)
// -> volts via the load resistance.
double shot_noise_v_per_rthz(double photon_rate_hz, double quantum_efficiency,
                             double load_ohm);

enum class NoiseCombination { linear, quadrature };

struct NoiseBudget {
  double shot_v = 0;
  double lockin_input_v = 0;
  double detector_load_v = 0;
  NoiseCombination mode = NoiseCombination::linear;
  double total_v = 0;
};

NoiseBudget noise_budget(double shot_v, double lockin_input_v,
                         double detector_load_v,
                         NoiseCombination mode = NoiseCombination::linear);

// Shot-noise-limited field sensitivity,
//   dB = gain_a * noise / (slope * gamma_e),
// with the slope measured after the lock-in gain (so gain cancels end to
// end). Result in T/sqrt(Hz).
double sensitivity_t_per_rthz(double max_slope_v_per_mhz,
                              double noise_total_v_per_rthz, double gain_a,
                              double gamma_e_mhz_per_mt);

// Log-spaced grid helper used by the sweep defaults.
std::vector<double> log_grid(double lo, double hi, int points);

}  // namespace nvmag
