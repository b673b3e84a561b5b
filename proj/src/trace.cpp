#include "nvmag/trace.hpp"

#include <cmath>
#include <random>

#include "nvmag/errors.hpp"
#include "nvmag/fft.hpp"
#include "nvmag/spin_model.hpp"
#include "nvmag/units.hpp"

namespace nvmag {

void FieldScenario::validate() const {
  for (const auto& t : tones) {
    if (!(t.freq_hz > 0)) {
      throw ValidationError("scenario: tone frequencies must be positive");
    }
    if (t.amplitude_t < 0) {
      throw ValidationError("scenario: tone amplitudes must be >= 0");
    }
  }
  if (!(hum.fundamental_hz > 0)) {
    throw ValidationError("scenario: hum fundamental must be positive");
  }
  for (const double a : hum.odd_harmonic_amps_t) {
    if (a < 0) throw ValidationError("scenario: hum amplitudes must be >= 0");
  }
  if (white_noise_t_per_rthz < 0 || drift_t_per_rts < 0) {
    throw ValidationError("scenario: noise densities must be >= 0");
  }
}

void SensorOperatingPoint::validate() const {
  if (!(corner_freq_hz > 0)) {
    throw ValidationError("op_point: corner frequency must be positive");
  }
  if (!(sample_rate_hz > 2.0 * corner_freq_hz)) {
    throw ValidationError(
        "op_point: sample rate must exceed twice the corner frequency");
  }
  if (slope_v_per_mhz < 0 || electronic_noise_v_per_rthz < 0) {
    throw ValidationError("op_point: negative slope or noise");
  }
  if (!(gamma_e_mhz_per_mt > 0)) {
    throw ValidationError("op_point: gamma_e must be positive");
  }
}

TimeTrace synthesize_trace(const FieldScenario& scenario,
                           const SensorOperatingPoint& op, double duration_s) {
  scenario.validate();
  op.validate();

  const double fs = op.sample_rate_hz;
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * fs));
  if (n < 2) {
    throw ValidationError("synthesize_trace: need at least 2 samples");
  }

  // Small-signal range: the deterministic field must stay well inside the
  // addressed line.
  if (op.linewidth_mhz > 0) {
    double peak_t = 0;
    for (const auto& t : scenario.tones) peak_t += t.amplitude_t;
    for (const double a : scenario.hum.odd_harmonic_amps_t) peak_t += a;
    const double peak_detuning_mhz =
        op.gamma_e_mhz_per_mt * (peak_t * 1e3);  // T -> mT
    if (peak_detuning_mhz > 0.5 * op.linewidth_mhz) {
      throw ValidationError(
          "synthesize_trace: field leaves the linear range of the line "
          "(|gamma_e B| > linewidth/2)");
    }
  }

  std::mt19937_64 rng(op.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double white_sigma_t =
      scenario.white_noise_t_per_rthz * std::sqrt(fs / 2.0);
  const double drift_sigma_t = scenario.drift_t_per_rts / std::sqrt(fs);
  const double electronic_sigma_v =
      op.electronic_noise_v_per_rthz * std::sqrt(fs / 2.0);
  const double v_per_t =
      units::volts_per_tesla(op.slope_v_per_mhz, op.gamma_e_mhz_per_mt);

  std::vector<double> v(n);
  double walk_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;

    double field_t = 0.0;
    for (const auto& tone : scenario.tones) {
      field_t += tone.amplitude_t *
                 std::sin(2.0 * units::pi * tone.freq_hz * t + tone.phase_rad);
    }
    for (std::size_t k = 0; k < scenario.hum.odd_harmonic_amps_t.size(); ++k) {
      const double f = scenario.hum.fundamental_hz * (2.0 * k + 1.0);
      field_t += scenario.hum.odd_harmonic_amps_t[k] *
                 std::sin(2.0 * units::pi * f * t);
    }

    // All three channels draw every sample so the stream layout does not
    // depend on which densities are enabled.
    const double white_draw = normal(rng);
    const double walk_draw = normal(rng);
    const double electronic_draw = normal(rng);

    field_t += white_sigma_t * white_draw;
    walk_t += drift_sigma_t * walk_draw;
    field_t += walk_t;

    // Thermal drift of the zero-field splitting enters as an extra
    // detuning through the same slope.
    const double thermal_detuning_mhz =
        thermal_shift_khz(scenario.temp_drift_k_per_s * t) * 1e-3;

    v[i] = field_t * v_per_t + op.slope_v_per_mhz * thermal_detuning_mhz +
           electronic_sigma_v * electronic_draw;
  }

  TimeTrace trace;
  trace.samples = std::move(v);
  trace.sample_rate_hz = fs;
  trace.units = TraceUnits::volts;
  trace.seed = op.seed;
  return lowpass_first_order(trace, op.corner_freq_hz);
}

TimeTrace lowpass_first_order(const TimeTrace& trace, double corner_hz) {
  if (trace.samples.size() < 2) {
    throw ValidationError("lowpass: trace too short");
  }
  if (!(corner_hz > 0) || !(corner_hz < trace.sample_rate_hz / 2.0)) {
    throw ValidationError("lowpass: corner must lie in (0, fs/2)");
  }

  const std::size_t n = trace.samples.size();
  auto spectrum = rfft(trace.samples);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double f = trace.sample_rate_hz * static_cast<double>(k) /
                     static_cast<double>(n);
    const std::complex<double> h = 1.0 / std::complex<double>(1.0, f / corner_hz);
    spectrum[k] *= h;
  }
  TimeTrace out = trace;
  out.samples = irfft(spectrum, n);
  return out;
}

TimeTrace volts_to_tesla(const TimeTrace& trace, double slope_v_per_mhz,
                         double gamma_e_mhz_per_mt) {
  if (trace.units != TraceUnits::volts) {
    throw ValidationError("volts_to_tesla: trace is not in volts");
  }
  if (!(slope_v_per_mhz > 0) || !(gamma_e_mhz_per_mt > 0)) {
    throw ValidationError("volts_to_tesla: slope and gamma_e must be positive");
  }
  const double v_per_t =
      units::volts_per_tesla(slope_v_per_mhz, gamma_e_mhz_per_mt);
  TimeTrace out = trace;
  for (double& s : out.samples) s /= v_per_t;
  out.units = TraceUnits::tesla;
  return out;
}

}  // namespace nvmag
