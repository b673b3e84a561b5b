#pragma once

namespace nvmag::units {

// All public frequencies in this library are plain (non-angular) MHz;
// rates in MHz are reciprocal microseconds. Factors of 2*pi appear only
// where a coherence time is converted to a linewidth.

inline constexpr double pi = 3.14159265358979323846;

inline constexpr double electron_charge_c = 1.602176634e-19;

// Atom number density of diamond (3.515 g/cm^3, 12.011 g/mol).
inline constexpr double diamond_carbon_density_per_mm3 = 1.76e20;

inline constexpr double mhz_to_hz(double f_mhz) { return f_mhz * 1e6; }
inline constexpr double hz_to_mhz(double f_hz) { return f_hz * 1e-6; }
inline constexpr double khz_to_mhz(double f_khz) { return f_khz * 1e-3; }

// Gyromagnetic ratio: MHz/mT -> Hz/T.
inline constexpr double mhz_per_mt_to_hz_per_t(double g) { return g * 1e9; }

// Spectral slope: V/MHz -> V/Hz.
inline constexpr double v_per_mhz_to_v_per_hz(double s) { return s * 1e-6; }

// Field-to-voltage factor of an operating point: V/T given a slope in
// V/MHz and a gyromagnetic ratio in MHz/mT.
inline constexpr double volts_per_tesla(double slope_v_per_mhz,
                                        double gamma_e_mhz_per_mt) {
  return slope_v_per_mhz * gamma_e_mhz_per_mt * 1e3;
}

}  // namespace nvmag::units
