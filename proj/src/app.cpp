#include "nvmag/app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "nvmag/analysis.hpp"
#include "nvmag/cavity.hpp"
#include "nvmag/config.hpp"
#include "nvmag/csv.hpp"
#include "nvmag/errors.hpp"
#include "nvmag/lockin.hpp"
#include "nvmag/sensing.hpp"
#include "nvmag/spin_model.hpp"
#include "nvmag/trace.hpp"
#include "nvmag/units.hpp"

namespace nvmag::app {

namespace {

namespace fs = std::filesystem;

struct Context {
  RunConfig cfg;
  std::string out_dir;
  bool check_oracle = false;

  std::vector<std::string> comments() const {
    return standard_comments(cfg.config_hash, cfg.run.seed);
  }
  std::string path(const std::string& name) const {
    return (fs::path(out_dir) / name).string();
  }
};

double median(std::vector<double> v) {
  if (v.empty()) throw NumericalError("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double median_asd_in_band(const NoisePSD& spec, double f_lo, double f_hi) {
  std::vector<double> band;
  for (std::size_t k = 0; k < spec.freqs_hz.size(); ++k) {
    if (spec.freqs_hz[k] >= f_lo && spec.freqs_hz[k] <= f_hi) {
      band.push_back(spec.asd[k]);
    }
  }
  return median(std::move(band));
}

double asd_at(const NoisePSD& spec, double f_hz) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < spec.freqs_hz.size(); ++k) {
    if (std::abs(spec.freqs_hz[k] - f_hz) <
        std::abs(spec.freqs_hz[best] - f_hz)) {
      best = k;
    }
  }
  return spec.asd[best];
}

// Both drive variants share everything except the tone composition.
DriveConfig with_tones(const DriveSection& d, double a_par, bool three) {
  DriveSection copy = d;
  copy.three_tone = three;
  return copy.make_drive(a_par);
}

Spectrum derivative(const Spectrum& s) {
  Spectrum d;
  d.units = s.units;
  for (std::size_t i = 1; i + 1 < s.freqs_mhz.size(); ++i) {
    d.freqs_mhz.push_back(s.freqs_mhz[i]);
    d.values.push_back((s.values[i + 1] - s.values[i - 1]) /
                       (s.freqs_mhz[i + 1] - s.freqs_mhz[i - 1]));
  }
  return d;
}

double oracle_max_rel_dev(const SpinModelParams& p, const DriveConfig& drive,
                          const ModulationConfig& mod,
                          const std::vector<double>& grid, double gain,
                          double v0, SidebandTruncation trunc) {
  const Spectrum fast = lockin_spectrum(p, drive, mod, grid, gain, v0, trunc);
  const Spectrum slow = lockin_oracle(p, drive, mod, grid, gain, v0);
  double peak = 0;
  for (const double v : slow.values) peak = std::max(peak, std::abs(v));
  if (peak == 0) return 0;
  double dev = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    dev = std::max(dev, std::abs(fast.values[i] - slow.values[i]) / peak);
  }
  return dev;
}

void write_surface_svg(const std::string& path, const SlopeSurface& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("svg: cannot open '" + path + "'");

  const int cell = 20;
  const int margin = 60;
  const int nx = static_cast<int>(s.omega_axis_mhz.size());
  const int ny = static_cast<int>(s.gamma_p_axis_mhz.size());
  const int width = margin * 2 + nx * cell;
  const int height = margin * 2 + ny * cell;

  double lo = s.slopes_v_per_mhz[0][0], hi = lo;
  for (const auto& row : s.slopes_v_per_mhz) {
    for (const double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      const double t = (s.slopes_v_per_mhz[i][j] - lo) / span;
      const int r = static_cast<int>(std::lround(40 + 215 * t));
      const int g = static_cast<int>(std::lround(40 + 80 * t));
      const int b = static_cast<int>(std::lround(120 - 80 * t));
      // Row 0 (smallest pump rate) at the bottom.
      const int y = margin + (ny - 1 - i) * cell;
      out << "<rect x=\"" << margin + j * cell << "\" y=\"" << y
          << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb("
          << r << "," << g << "," << b << ")\"/>\n";
    }
  }
  out << "<text x=\"" << margin << "\" y=\"" << height - margin / 3
      << "\" font-size=\"12\">omega " << format_number(s.omega_axis_mhz.front())
      << " to " << format_number(s.omega_axis_mhz.back()) << " MHz</text>\n";
  out << "<text x=\"8\" y=\"" << margin / 2
      << "\" font-size=\"12\">gamma_p " << format_number(s.gamma_p_axis_mhz.front())
      << " to " << format_number(s.gamma_p_axis_mhz.back())
      << " MHz, slope " << format_number(lo) << " to " << format_number(hi)
      << " V/MHz</text>\n";
  out << "</svg>\n";
}

// Frequency grid for a slope evaluation at one drive point, matching the
// sweep's internal span heuristic.
std::vector<double> slope_grid(const SpinModelParams& p,
                               const DriveConfig& drive,
                               const ModulationConfig& mod, double v0,
                               int points) {
  const auto comps = resonance_components(p, drive, v0);
  double gmax = 0;
  for (const auto& c : comps) gmax = std::max(gmax, c.hwhm_mhz);
  const double span = 2.0 * p.a_par_mhz + mod.m_depth_mhz + 6.0 * gmax;
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = drive.omega_0_mhz - span +
              2.0 * span * i / static_cast<double>(points - 1);
  }
  return grid;
}

int cmd_spectrum(const Context& ctx) {
  const auto& p = ctx.cfg.need_spin_model();
  const auto& d = ctx.cfg.need_drive();
  const auto grid = ctx.cfg.need_grid().make_grid(d.omega_0_mhz);

  const Spectrum single = cw_spectrum(p, with_tones(d, p.a_par_mhz, false),
                                      grid, d.v0_volts);
  const Spectrum three = cw_spectrum(p, with_tones(d, p.a_par_mhz, true),
                                     grid, d.v0_volts);

  CsvTable t;
  t.comments = ctx.comments();
  t.header = "freq_mhz,single_tone_v,three_tone_v";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.rows.push_back({grid[i], single.values[i], three.values[i]});
  }
  write_csv(ctx.path("cw_spectrum.csv"), t);
  return 0;
}

int cmd_lockin(const Context& ctx) {
  const auto& p = ctx.cfg.need_spin_model();
  const auto& d = ctx.cfg.need_drive();
  const auto& mod = ctx.cfg.need_modulation();
  const auto& lk = ctx.cfg.need_lockin();
  const auto grid = ctx.cfg.need_grid().make_grid(d.omega_0_mhz);
  const double gain = lk.prefactor_a();

  const Spectrum single =
      lockin_spectrum(p, with_tones(d, p.a_par_mhz, false), mod, grid, gain,
                      d.v0_volts, lk.truncation());
  const Spectrum three =
      lockin_spectrum(p, with_tones(d, p.a_par_mhz, true), mod, grid, gain,
                      d.v0_volts, lk.truncation());

  CsvTable t;
  t.comments = ctx.comments();
  t.header = "freq_mhz,single_tone_v,three_tone_v";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.rows.push_back({grid[i], single.values[i], three.values[i]});
  }
  write_csv(ctx.path("lockin_spectrum.csv"), t);

  if (ctx.check_oracle) {
    const double dev = oracle_max_rel_dev(
        p, d.make_drive(p.a_par_mhz), mod, grid, gain, d.v0_volts,
        lk.truncation());
    std::cerr << "lockin oracle max relative deviation: "
              << format_number(dev) << "\n";
  }
  return 0;
}

int cmd_cavity(const Context& ctx) {
  const auto& c = ctx.cfg.need_cavity();
  const AbsorptionBudget budget = absorption_budget(c.cavity);
  const double projected =
      finesse_from_reflectivities(c.cavity.r1, c.cavity.r2);
  const double t_in = 1.0 - c.cavity.r1;
  const double p_cav = intracavity_power_w(c.p_in_w, t_in, budget.rho_loaded);
  const double gamma_p = pump_rate_mhz(p_cav, c.epsilon_khz_per_mw);

  // The published absorption coefficients are amplitude-convention
  // numbers, so the concentration chain always uses that budget; the
  // configured convention governs the loss decomposition above.
  CavityConfig amp_cfg = c.cavity;
  amp_cfg.convention = LossConvention::amplitude;
  const AbsorptionBudget amp_budget = absorption_budget(amp_cfg);
  const NvConcentration nv = nv_concentration(
      amp_budget.alpha_ab_per_mm, c.alpha_background_per_mm, c.sigma_nv_mm2);

  std::vector<ReportRow> rows = {
      {"projected_finesse", projected},
      {"rho_empty", budget.rho_empty},
      {"rho_loaded", budget.rho_loaded},
      {"alpha_total", budget.alpha_total},
      {"alpha_ab_per_mm", budget.alpha_ab_per_mm},
      {"alpha_sc_per_surface", budget.alpha_sc},
      {"alpha_br_per_mm", budget.alpha_br_per_mm},
      {"alpha_surf_per_surface", budget.alpha_surf},
      {"alpha_ab_amplitude_per_mm", amp_budget.alpha_ab_per_mm},
      {"p_in_w", c.p_in_w},
      {"t_in", t_in},
      {"p_cav_w", p_cav},
      {"gamma_p_mhz", gamma_p},
      {"nv_density_per_mm3", nv.density_per_mm3},
      {"nv_ppb", nv.ppb},
      {"nv_count_in_volume", nv.density_per_mm3 * c.excitation_volume_mm3},
  };
  write_report_csv(ctx.path("cavity_budget.csv"), ctx.comments(), rows);
  return 0;
}

int cmd_sweep(const Context& ctx) {
  const auto& p = ctx.cfg.need_spin_model();
  const auto& d = ctx.cfg.need_drive();
  const auto& mod = ctx.cfg.need_modulation();
  const auto& lk = ctx.cfg.need_lockin();
  const auto& sw = ctx.cfg.need_sweep();

  SweepOptions opts;
  opts.three_tone = d.three_tone;
  opts.truncation = lk.truncation();
  const SlopeSurface surface =
      sweep_slope(p, sw.omega_axis(), sw.gamma_p_axis(), mod, lk.prefactor_a(),
                  d.v0_volts, opts);

  CsvTable t;
  t.comments = ctx.comments();
  std::string header = "gamma_p_mhz";
  for (const double w : surface.omega_axis_mhz) {
    header += ",omega_" + format_number(w) + "_mhz";
  }
  t.header = header;
  for (std::size_t i = 0; i < surface.gamma_p_axis_mhz.size(); ++i) {
    std::vector<double> row{surface.gamma_p_axis_mhz[i]};
    row.insert(row.end(), surface.slopes_v_per_mhz[i].begin(),
               surface.slopes_v_per_mhz[i].end());
    t.rows.push_back(std::move(row));
  }
  write_csv(ctx.path("slope_surface.csv"), t);
  write_surface_svg(ctx.path("slope_surface.svg"), surface);
  return 0;
}

int cmd_sensitivity(const Context& ctx) {
  const auto& p = ctx.cfg.need_spin_model();
  const auto& d = ctx.cfg.need_drive();
  const auto& mod = ctx.cfg.need_modulation();
  const auto& lk = ctx.cfg.need_lockin();
  const auto& nz = ctx.cfg.need_noise();

  const double shot = shot_noise_v_per_rthz(
      nz.detected_photon_rate_hz(), nz.quantum_efficiency, nz.load_ohm);
  const NoiseBudget budget =
      noise_budget(shot, nz.lockin_input_nv_per_rthz * 1e-9,
                   nz.detector_load_nv_per_rthz * 1e-9, nz.combination);

  const DriveConfig drive = d.make_drive(p.a_par_mhz);
  const auto grid = slope_grid(p, drive, mod, d.v0_volts, 801);
  const Spectrum sli = lockin_spectrum(p, drive, mod, grid, lk.prefactor_a(),
                                       d.v0_volts, lk.truncation());
  const SlopePoint slope = max_slope(sli);
  const double db = sensitivity_t_per_rthz(
      slope.slope_v_per_mhz, budget.total_v, lk.prefactor_a(),
      p.gamma_e_mhz_per_mt);

  std::vector<ReportRow> rows = {
      {"shot_noise_v_per_rthz", shot},
      {"lockin_input_v_per_rthz", nz.lockin_input_nv_per_rthz * 1e-9},
      {"detector_load_v_per_rthz", nz.detector_load_nv_per_rthz * 1e-9},
      {"noise_total_v_per_rthz", budget.total_v},
      {"gain_prefactor", lk.prefactor_a()},
      {"max_slope_v_per_mhz", slope.slope_v_per_mhz},
      {"max_slope_freq_mhz", slope.freq_mhz},
      {"projected_sensitivity_t_per_rthz", db},
  };
  write_report_csv(ctx.path("sensitivity_report.csv"), ctx.comments(), rows);
  return 0;
}

int cmd_trace(const Context& ctx) {
  const auto& sc = ctx.cfg.need_scenario();
  SensorOperatingPoint op = ctx.cfg.need_op_point();
  op.seed = ctx.cfg.run.seed;
  const TimeTrace trace = synthesize_trace(sc.scenario, op, sc.duration_s);
  write_trace_csv(ctx.path("trace.csv"), ctx.comments(), trace);
  return 0;
}

int cmd_analyze(const Context& ctx, const std::string& trace_path) {
  const auto& an = ctx.cfg.need_analysis();
  TimeTrace trace = read_trace_csv(trace_path);
  if (trace.units == TraceUnits::volts) {
    const auto& op = ctx.cfg.need_op_point();
    trace = volts_to_tesla(trace, op.slope_v_per_mhz, op.gamma_e_mhz_per_mt);
  }

  const NoisePSD spec = psd(trace, an.segment_len, an.overlap_fraction);
  const auto smooth = savitzky_golay(spec.asd, an.sg_window, an.sg_order);
  CsvTable asd_table;
  asd_table.comments = ctx.comments();
  asd_table.header = "freq_hz,asd_t_per_rthz,asd_smoothed_t_per_rthz";
  for (std::size_t k = 0; k < spec.freqs_hz.size(); ++k) {
    asd_table.rows.push_back({spec.freqs_hz[k], spec.asd[k], smooth[k]});
  }
  write_csv(ctx.path("asd.csv"), asd_table);

  const AllanCurve allan = allan_deviation(trace, default_tau_grid(trace));
  CsvTable allan_table;
  allan_table.comments = ctx.comments();
  allan_table.header = "tau_s,allan_deviation_t";
  for (std::size_t k = 0; k < allan.taus_s.size(); ++k) {
    allan_table.rows.push_back({allan.taus_s[k], allan.sigmas[k]});
  }
  write_csv(ctx.path("allan.csv"), allan_table);

  std::size_t imin = 0;
  for (std::size_t k = 1; k < allan.sigmas.size(); ++k) {
    if (allan.sigmas[k] < allan.sigmas[imin]) imin = k;
  }
  std::vector<ReportRow> rows = {
      {"noise_floor_median_5_159_t", median_asd_in_band(spec, 5, 159)},
      {"noise_floor_median_0p1_159_t", median_asd_in_band(spec, 0.1, 159)},
      {"allan_min_t", allan.sigmas[imin]},
      {"allan_min_tau_s", allan.taus_s[imin]},
      {"extracted_sensitivity_t_per_rthz",
       extract_sensitivity(allan.sigmas[imin], allan.taus_s[imin])},
  };
  write_report_csv(ctx.path("summary.csv"), ctx.comments(), rows);
  return 0;
}

int cmd_reproduce(const Context& ctx) {
  const auto& p = ctx.cfg.need_spin_model();
  const auto& d = ctx.cfg.need_drive();
  const auto& mod = ctx.cfg.need_modulation();
  const auto& lk = ctx.cfg.need_lockin();
  const auto& sc = ctx.cfg.need_scenario();
  const auto& an = ctx.cfg.need_analysis();
  const double gain = lk.prefactor_a();

  cmd_cavity(ctx);
  cmd_spectrum(ctx);
  cmd_sweep(ctx);
  cmd_sensitivity(ctx);

  // Lock-in spectra and their derivatives, single versus three tone.
  const auto grid = ctx.cfg.need_grid().make_grid(d.omega_0_mhz);
  const Spectrum single =
      lockin_spectrum(p, with_tones(d, p.a_par_mhz, false), mod, grid, gain,
                      d.v0_volts, lk.truncation());
  const Spectrum three =
      lockin_spectrum(p, with_tones(d, p.a_par_mhz, true), mod, grid, gain,
                      d.v0_volts, lk.truncation());
  {
    CsvTable t;
    t.comments = ctx.comments();
    t.header = "freq_mhz,single_tone_v,three_tone_v";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      t.rows.push_back({grid[i], single.values[i], three.values[i]});
    }
    write_csv(ctx.path("lockin_spectrum.csv"), t);

    const Spectrum ds = derivative(single);
    const Spectrum dt3 = derivative(three);
    CsvTable td;
    td.comments = ctx.comments();
    td.header = "freq_mhz,single_tone_slope_v_per_mhz,three_tone_slope_v_per_mhz";
    for (std::size_t i = 0; i < ds.freqs_mhz.size(); ++i) {
      td.rows.push_back({ds.freqs_mhz[i], ds.values[i], dt3.values[i]});
    }
    write_csv(ctx.path("lockin_slopes.csv"), td);
  }

  // Oracle cross-check on a decimated grid.
  std::vector<double> coarse;
  for (std::size_t i = 0; i < grid.size(); i += 8) coarse.push_back(grid[i]);
  const double oracle_dev =
      oracle_max_rel_dev(p, d.make_drive(p.a_par_mhz), mod, coarse, gain,
                         d.v0_volts, lk.truncation());

  // Noise-density traces: hum only, on and off resonance; the ac test
  // field rides on top for the beat trace.
  SensorOperatingPoint op = ctx.cfg.need_op_point();
  op.seed = ctx.cfg.run.seed;
  FieldScenario hum_only = sc.scenario;
  hum_only.tones.clear();

  const TimeTrace on_v = synthesize_trace(hum_only, op, sc.duration_s);
  SensorOperatingPoint op_off = op;
  op_off.slope_v_per_mhz = 0;
  op_off.seed = ctx.cfg.run.seed + 1;
  const TimeTrace off_v = synthesize_trace(hum_only, op_off, sc.duration_s);
  SensorOperatingPoint op_beat = op;
  op_beat.seed = ctx.cfg.run.seed + 2;
  const TimeTrace beat_v = synthesize_trace(sc.scenario, op_beat, sc.duration_s);

  // Both traces share the on-resonance calibration, as in a measured
  // off-resonance control.
  const TimeTrace on_t = volts_to_tesla(on_v, op.slope_v_per_mhz,
                                        op.gamma_e_mhz_per_mt);
  TimeTrace off_t = off_v;
  {
    const double v_per_t =
        units::volts_per_tesla(op.slope_v_per_mhz, op.gamma_e_mhz_per_mt);
    for (double& s : off_t.samples) s /= v_per_t;
    off_t.units = TraceUnits::tesla;
  }

  const NoisePSD asd_on = psd(on_t, an.segment_len, an.overlap_fraction);
  const NoisePSD asd_off = psd(off_t, an.segment_len, an.overlap_fraction);
  const auto smooth_on = savitzky_golay(asd_on.asd, an.sg_window, an.sg_order);
  const auto smooth_off =
      savitzky_golay(asd_off.asd, an.sg_window, an.sg_order);
  {
    CsvTable t;
    t.comments = ctx.comments();
    t.header =
        "freq_hz,asd_on_t_per_rthz,asd_off_t_per_rthz,asd_on_smoothed,"
        "asd_off_smoothed";
    for (std::size_t k = 0; k < asd_on.freqs_hz.size(); ++k) {
      t.rows.push_back({asd_on.freqs_hz[k], asd_on.asd[k], asd_off.asd[k],
                        smooth_on[k], smooth_off[k]});
    }
    write_csv(ctx.path("fig_noise_asd.csv"), t);
  }

  const auto taus = default_tau_grid(on_t);
  const AllanCurve allan_on = allan_deviation(on_t, taus);
  const AllanCurve allan_off = allan_deviation(off_t, taus);
  {
    CsvTable t;
    t.comments = ctx.comments();
    t.header = "tau_s,allan_on_t,allan_off_t";
    for (std::size_t k = 0; k < taus.size(); ++k) {
      t.rows.push_back({allan_on.taus_s[k], allan_on.sigmas[k],
                        allan_off.sigmas[k]});
    }
    write_csv(ctx.path("fig_allan.csv"), t);
  }

  write_trace_csv(ctx.path("fig_beat_trace.csv"), ctx.comments(), beat_v,
                  4000);

  std::size_t imin = 0;
  for (std::size_t k = 1; k < allan_on.sigmas.size(); ++k) {
    if (allan_on.sigmas[k] < allan_on.sigmas[imin]) imin = k;
  }
  const LogLogFit white_fit =
      loglog_slope(allan_off.taus_s, allan_off.sigmas, 0.005, 1.0);
  const double beat =
      beat_frequency_hz(beat_v, 2.0, 30.0, an.segment_len);

  const SlopePoint s_single = max_slope(single);
  const SlopePoint s_three = max_slope(three);

  std::vector<ReportRow> rows = {
      {"slope_single_v_per_mhz", s_single.slope_v_per_mhz},
      {"slope_three_v_per_mhz", s_three.slope_v_per_mhz},
      {"slope_ratio_three_to_single",
       s_three.slope_v_per_mhz / s_single.slope_v_per_mhz},
      {"oracle_max_rel_dev", oracle_dev},
      {"noise_floor_median_5_159_t", median_asd_in_band(asd_on, 5, 159)},
      {"noise_floor_median_0p1_159_t", median_asd_in_band(asd_on, 0.1, 159)},
      {"hum_peak_contrast_on_off",
       asd_at(asd_on, hum_only.hum.fundamental_hz) /
           asd_at(asd_off, hum_only.hum.fundamental_hz)},
      {"allan_white_slope_off", white_fit.slope},
      {"allan_min_t", allan_on.sigmas[imin]},
      {"allan_min_tau_s", allan_on.taus_s[imin]},
      {"extracted_sensitivity_t_per_rthz",
       extract_sensitivity(allan_on.sigmas[imin], allan_on.taus_s[imin])},
      {"beat_freq_hz", beat},
  };

  // The sensitivity projection feeds the summary report.
  {
    const auto& nz = ctx.cfg.need_noise();
    const double shot = shot_noise_v_per_rthz(
        nz.detected_photon_rate_hz(), nz.quantum_efficiency, nz.load_ohm);
    const NoiseBudget budget =
        noise_budget(shot, nz.lockin_input_nv_per_rthz * 1e-9,
                     nz.detector_load_nv_per_rthz * 1e-9, nz.combination);
    const DriveConfig drive = d.make_drive(p.a_par_mhz);
    const auto sgrid = slope_grid(p, drive, mod, d.v0_volts, 801);
    const Spectrum sli = lockin_spectrum(p, drive, mod, sgrid, gain,
                                         d.v0_volts, lk.truncation());
    rows.push_back({"projected_sensitivity_t_per_rthz",
                    sensitivity_t_per_rthz(max_slope(sli).slope_v_per_mhz,
                                           budget.total_v, gain,
                                           p.gamma_e_mhz_per_mt)});
  }

  write_report_csv(ctx.path("report.csv"), ctx.comments(), rows);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App cli{"Cavity-enhanced NV magnetometry simulation toolkit"};
  cli.require_subcommand(1);

  std::string config_path;
  std::string out_dir_flag;
  std::string convention_flag;
  std::string trace_path;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  bool check_oracle = false;

  cli.add_option("--config", config_path, "configuration file (.ini or .json)")
      ->required();
  cli.add_option("--out-dir", out_dir_flag, "output directory override");
  auto* seed_opt = cli.add_option("--seed", seed_flag, "seed override");

  auto* spectrum_cmd = cli.add_subcommand("spectrum", "CW ODMR spectrum");
  auto* lockin_cmd = cli.add_subcommand("lockin", "lock-in spectrum");
  lockin_cmd->add_flag("--check-oracle", check_oracle,
                       "compare against the time-domain demodulation oracle");
  auto* cavity_cmd = cli.add_subcommand("cavity", "cavity power budget");
  cavity_cmd->add_option("--convention", convention_flag,
                         "loss convention: intensity or amplitude");
  auto* sweep_cmd = cli.add_subcommand("sweep", "lock-in slope surface");
  auto* sens_cmd = cli.add_subcommand("sensitivity", "sensitivity projection");
  auto* trace_cmd = cli.add_subcommand("trace", "synthesize a time trace");
  auto* analyze_cmd = cli.add_subcommand("analyze", "ASD / Allan / summary");
  analyze_cmd->add_option("--trace", trace_path, "input trace CSV")->required();
  auto* repro_cmd =
      cli.add_subcommand("reproduce", "full desk-scale pipeline");

  // Global options may appear after the subcommand name.
  for (auto* sub : {spectrum_cmd, lockin_cmd, cavity_cmd, sweep_cmd, sens_cmd,
                    trace_cmd, analyze_cmd, repro_cmd}) {
    sub->fallthrough();
  }

  std::vector<const char*> argv;
  argv.push_back("nvmag");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    cli.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 1;
  }
  seed_set = seed_opt->count() > 0;

  try {
    Context ctx;
    ctx.cfg = load_config(config_path);
    if (seed_set) {
      ctx.cfg.run.seed = seed_flag;
      if (ctx.cfg.op_point) ctx.cfg.op_point->seed = seed_flag;
    }
    if (!convention_flag.empty() && ctx.cfg.cavity) {
      if (convention_flag == "intensity") {
        ctx.cfg.cavity->cavity.convention = LossConvention::intensity;
      } else if (convention_flag == "amplitude") {
        ctx.cfg.cavity->cavity.convention = LossConvention::amplitude;
      } else {
        throw ValidationError(
            "--convention must be intensity or amplitude");
      }
    }
    ctx.out_dir = out_dir_flag.empty() ? ctx.cfg.run.out_dir : out_dir_flag;
    ctx.check_oracle = check_oracle;
    fs::create_directories(ctx.out_dir);

    if (spectrum_cmd->parsed()) return cmd_spectrum(ctx);
    if (lockin_cmd->parsed()) return cmd_lockin(ctx);
    if (cavity_cmd->parsed()) return cmd_cavity(ctx);
    if (sweep_cmd->parsed()) return cmd_sweep(ctx);
    if (sens_cmd->parsed()) return cmd_sensitivity(ctx);
    if (trace_cmd->parsed()) return cmd_trace(ctx);
    if (analyze_cmd->parsed()) return cmd_analyze(ctx, trace_path);
    if (repro_cmd->parsed()) return cmd_reproduce(ctx);
    std::cerr << "no subcommand selected\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace nvmag::app
