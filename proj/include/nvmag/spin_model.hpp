#pragma once

#include <cstdint>
#include <vector>

namespace nvmag {

// Five-level NV- rate model: ground ms=0 / ms=+-1, excited ms=0 / ms=+-1,
// and the metastable singlet. Optical pumping is spin conserving; the
// spin selectivity of the intersystem crossing (k_isc1 > k_isc0) is what
// produces the fluorescence dip under resonant microwave drive. Microwave
// coherence is folded into a detuning-dependent incoherent mixing rate
// W(delta), so steady states come from a 5x5 linear solve.
//
// Units: rates and frequencies are plain MHz (1/us), t1_spin is ms,
// t2_star is us.
struct SpinModelParams {
  double k_r_mhz;     // radiative decay of both excited levels
  double k_isc0_mhz;  // intersystem crossing, ms=0 excited level
  double k_isc1_mhz;  // intersystem crossing, ms=+-1 excited level
  double k_s0_mhz;    // singlet -> ground ms=0
  double k_s1_mhz;    // singlet -> ground ms=+-1
  double t1_spin_ms;  // ground-state spin relaxation time
  double t2_star_us;  // inhomogeneous dephasing time
  double a_par_mhz = 2.16;           // axial hyperfine splitting
  double gamma_e_mhz_per_mt = 28.0;  // gyromagnetic ratio

  void validate() const;
};

// Microwave drive plus the optical pump rate it competes with. `tones`
// lists relative offsets (MHz) of simultaneously applied drive tones,
// each at the same Rabi frequency; a single-tone drive is {0}.
struct DriveConfig {
  double gamma_p_mhz = 0.0;
  double omega_rabi_mhz = 0.0;
  double omega_c_mhz = 0.0;  // carrier frequency
  double omega_0_mhz = 0.0;  // resonance center (central hyperfine line)
  std::vector<double> tones{0.0};

  void validate() const;
};

// Occupation fractions; sum() is 1 for any steady state.
struct PopulationVector {
  double n_g0 = 0, n_g1 = 0, n_e0 = 0, n_e1 = 0, n_s = 0;

  double sum() const { return n_g0 + n_g1 + n_e0 + n_e1 + n_s; }
  double excited() const { return n_e0 + n_e1; }
};

enum class SignalUnits { volts, contrast };

struct Spectrum {
  std::vector<double> freqs_mhz;  // strictly increasing
  std::vector<double> values;
  SignalUnits units = SignalUnits::volts;
};

// Half width of the dephasing-limited line: 1/(2*pi*t2star) in MHz.
double dephasing_hwhm_mhz(double t2_star_us);

// Incoherent microwave transition rate between the ground spin levels,
//   W(delta) = omega^2 * g2 / (2 (delta^2 + g2^2)),  g2 = 1/(2 pi t2*).
// Even in delta, maximal on resonance, zero without drive.
double mw_rate(double omega_rabi_mhz, double delta_mhz, double t2_star_us);

// Steady state of the rate equations under pump gamma_p and microwave
// mixing rate w_mw. Entries are clamped at zero and renormalized; the
// result sums to 1 within 1e-12.
PopulationVector steady_state(const SpinModelParams& params,
                              double gamma_p_mhz, double w_mw_mhz);

// Relative photon rate k_r * (n_e0 + n_e1).
double fluorescence(const PopulationVector& pop, double k_r_mhz);

// Peak fluorescence deficit (excited-population difference between the
// undriven and the resonantly driven steady state) and the half width at
// half maximum of the dip, for a single resonance driven at on-resonance
// rate w0. The HWHM comes from the rate model itself: the detuning at
// which W(delta) falls to the half-deficit rate. Captures both power
// broadening and pump-induced narrowing.
struct LineShape {
  double deficit;    // dimensionless population difference
  double hwhm_mhz;
};
LineShape single_line_shape(const SpinModelParams& params,
                            double gamma_p_mhz, double w0_mhz);

// One Lorentzian component of the CW spectrum: a hyperfine line driven by
// one tone of the composition.
struct LineComponent {
  double center_mhz;   // carrier frequency at which this pair resonates
  double amplitude_v;  // peak deficit in volts
  double hwhm_mhz;
};

// Decomposes the three hyperfine lines x drive tones into Lorentzian
// components. Tones acting on the same line add incoherently (their
// rates W sum), so three coincident tones are exactly equivalent to one
// tone with sqrt(3) times the Rabi frequency.
std::vector<LineComponent> resonance_components(const SpinModelParams& params,
                                                const DriveConfig& drive,
                                                double v0_volts);

// Pointwise CW signal: the fluorescence deficit relative to the
// off-resonance baseline (0 far from every line), in volts.
double cw_value(const std::vector<LineComponent>& components,
                double freq_mhz);

Spectrum cw_spectrum(const SpinModelParams& params, const DriveConfig& drive,
                     const std::vector<double>& freq_grid_mhz,
                     double v0_volts);

// Numeric HWHM of a single resolved dip: locates the extremum and the two
// half-maximum crossings by linear interpolation.
double linewidth_hwhm_mhz(const Spectrum& spectrum);

// gamma_e * b_par * cos(projection angle).
double zeeman_shift_mhz(double b_par_mt, double projection_angle_deg,
                        double gamma_e_mhz_per_mt);

// Temperature dependence of the zero-field splitting: -74.2 kHz/K.
double thermal_shift_khz(double delta_t_kelvin);

}  // namespace nvmag
