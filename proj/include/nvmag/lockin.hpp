#pragma once

#include <vector>

#include "nvmag/spin_model.hpp"

namespace nvmag {

// Sinusoidal frequency modulation of the microwave carrier: rate nu,
// depth m, modulation index beta = m/nu.
struct ModulationConfig {
  double nu_khz = 30.0;
  double m_depth_mhz = 0.5;
  // Sideband truncation order for the Bessel decomposition; -1 selects
  // ceil(beta) + 30, enough for the power sum to close to 1e-12.
  int n_max = -1;

  double nu_mhz() const { return nu_khz * 1e-3; }
  double beta() const { return m_depth_mhz / nu_mhz(); }
  int effective_n_max() const;
  void validate() const;
};

// Bessel decomposition of the FM drive. `raw` holds J_n(beta) for
// n = -n_max..n_max; `weights` is the same normalized so the largest
// magnitude is exactly 1. `significant_count` is the Carson-style order:
// the smallest N such that orders |n| <= N carry at least 99% of the
// carrier power, which tracks ceil(beta) for beta > 1.
struct SidebandWeights {
  std::vector<int> orders;
  std::vector<double> raw;
  std::vector<double> weights;
  int significant_count = 0;
};

SidebandWeights fm_sidebands(const ModulationConfig& mod);

enum class SidebandTruncation {
  half_beta,  // node count from ceil(beta/2), the default
  full_beta,  // node count from ceil(beta), for accuracy studies
};

// Demodulated lock-in spectrum: the in-phase component of the CW signal
// swept sinusoidally across the line, an antisymmetric derivative-like
// shape in volts. Evaluated as an antisymmetric Chebyshev-node sum of
// frequency-shifted CW spectra spanning the modulation depth.
Spectrum lockin_spectrum(const SpinModelParams& params,
                         const DriveConfig& drive, const ModulationConfig& mod,
                         const std::vector<double>& freq_grid_mhz,
                         double gain_a, double v0_volts,
                         SidebandTruncation trunc = SidebandTruncation::half_beta);

// Brute-force reference: time-discretizes the frequency modulation,
// evaluates the CW signal sample by sample, multiplies by the in-phase
// reference and averages. Test oracle for lockin_spectrum.
struct OracleOptions {
  int periods = 50;
  int samples_per_period = 256;
};
Spectrum lockin_oracle(const SpinModelParams& params, const DriveConfig& drive,
                       const ModulationConfig& mod,
                       const std::vector<double>& freq_grid_mhz, double gain_a,
                       double v0_volts, OracleOptions opts = {});

// Tone offsets that drive all three hyperfine lines at once.
std::vector<double> three_tone_drive(double omega_c_mhz, double a_par_mhz);

struct SlopePoint {
  double freq_mhz = 0;
  double slope_v_per_mhz = 0;
};

// Location and magnitude of the maximum absolute central-difference
// derivative over the grid.
SlopePoint max_slope(const Spectrum& spectrum);

}  // namespace nvmag
