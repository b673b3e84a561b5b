#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace nvmag {

struct FieldTone {
  double freq_hz = 0;
  double amplitude_t = 0;
  double phase_rad = 0;
};

// Mains interference: fundamental plus odd harmonics. Entry k of
// `odd_harmonic_amps_t` is the amplitude of (2k+1) * fundamental, so the
// default two-entry list covers 50 Hz and 150 Hz.
struct MainsHum {
  double fundamental_hz = 50.0;
  std::vector<double> odd_harmonic_amps_t;
};

struct FieldScenario {
  std::vector<FieldTone> tones;
  MainsHum hum;
  double white_noise_t_per_rthz = 0;
  double drift_t_per_rts = 0;       // random-walk step density, T/sqrt(s)
  double temp_drift_k_per_s = 0;    // slow thermal ramp

  void validate() const;
};

struct SensorOperatingPoint {
  double slope_v_per_mhz = 0;   // lock-in slope at the carrier, post gain
  double gamma_e_mhz_per_mt = 28.0;
  double corner_freq_hz = 159.0;
  double sample_rate_hz = 2000.0;
  double electronic_noise_v_per_rthz = 0;
  std::uint64_t seed = 0;
  // Half linewidth of the addressed line, for the small-signal range
  // check; 0 disables the check.
  double linewidth_mhz = 0;

  void validate() const;
};

enum class TraceUnits { volts, tesla };

struct TimeTrace {
  std::vector<double> samples;
  double sample_rate_hz = 0;
  TraceUnits units = TraceUnits::volts;
  std::optional<std::uint64_t> seed;  // absent for loaded traces
};

// Forward model of the magnetometer output: field scenario -> detuning ->
// voltage through the operating-point slope, plus electronic noise, then
// the lock-in output filter. Fully determined by the seed (mt19937_64
// with normal deviates; stable within a release, not across standard
// library implementations).
TimeTrace synthesize_trace(const FieldScenario& scenario,
                           const SensorOperatingPoint& op, double duration_s);

// First-order low-pass: the exact single-pole response H(f) =
// 1/(1 + i f/fc) applied in the frequency domain, so the magnitude
// matches 1/sqrt(1+(f/fc)^2) at every bin.
TimeTrace lowpass_first_order(const TimeTrace& trace, double corner_hz);

// Volts -> tesla through the operating-point slope and gyromagnetic
// ratio.
TimeTrace volts_to_tesla(const TimeTrace& trace, double slope_v_per_mhz,
                         double gamma_e_mhz_per_mt);

}  // namespace nvmag
