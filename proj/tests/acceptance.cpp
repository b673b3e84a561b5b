// Acceptance suite: runs every release criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nvmag/analysis.hpp"
#include "nvmag/app.hpp"
#include "nvmag/cavity.hpp"
#include "nvmag/lockin.hpp"
#include "nvmag/sensing.hpp"
#include "nvmag/spin_model.hpp"
#include "nvmag/trace.hpp"
#include "nvmag/units.hpp"

using namespace nvmag;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int number, const char* label, bool ok, const std::string& detail) {
  std::printf("[%s] %2d. %-34s %s\n", ok ? "PASS" : "FAIL", number, label,
              detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Reference model parameters: rates transcribed from Robledo et al.,
// New J. Phys. 13, 025013 (2011); coherence times and gain from the
// target operating conditions. Pinned here so the suite is self-contained.
SpinModelParams model() {
  SpinModelParams p{};
  p.k_r_mhz = 65.9;
  p.k_isc0_mhz = 7.9;
  p.k_isc1_mhz = 53.3;
  p.k_s0_mhz = 0.98;
  p.k_s1_mhz = 0.73;
  p.t1_spin_ms = 5.5;
  p.t2_star_us = 0.4;
  return p;
}

constexpr double kGain = 5e4;     // lock-in prefactor, 10 x gain setting
constexpr double kV0 = 6.2;       // calibrated off-resonance voltage scale

DriveConfig drive_at(double omega, double gamma_p, bool three, double a_par) {
  DriveConfig d;
  d.gamma_p_mhz = gamma_p;
  d.omega_rabi_mhz = omega;
  d.omega_0_mhz = 0.0;
  d.omega_c_mhz = 0.0;
  d.tones = three ? three_tone_drive(0.0, a_par) : std::vector<double>{0.0};
  return d;
}

std::vector<double> slope_grid(const SpinModelParams& p, const DriveConfig& d,
                               double m_depth, int points) {
  const auto comps = resonance_components(p, d, kV0);
  double gmax = 0.0;
  for (const auto& c : comps) gmax = std::max(gmax, c.hwhm_mhz);
  const double span = 2.0 * p.a_par_mhz + m_depth + 6.0 * gmax;
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) {
    g[i] = -span + 2.0 * span * i / static_cast<double>(points - 1);
  }
  return g;
}

double max_slope_at(const SpinModelParams& p, double omega, double gamma_p,
                    bool three, const ModulationConfig& mod) {
  const auto d = drive_at(omega, gamma_p, three, p.a_par_mhz);
  const auto grid = slope_grid(p, d, mod.m_depth_mhz, 801);
  return max_slope(lockin_spectrum(p, d, mod, grid, kGain, kV0))
      .slope_v_per_mhz;
}

void criterion_1_cavity_algebra() {
  const double projected = finesse_from_reflectivities(0.948, 0.998);
  double worst = 0.0;
  for (double f = 10.0; f <= 1e4; f *= 1.05) {
    const double rho = loss_from_finesse(f);
    worst = std::max(worst,
                     std::abs(finesse_from_reflectivities(rho, rho) - f) / f);
  }
  const bool ok = std::abs(projected - 113.0) <= 1.0 && worst < 1e-10;
  report(1, "cavity finesse algebra", ok,
         "projected=" + fmt(projected) + " roundtrip_err=" + fmt(worst));
}

void criterion_2_power_chain() {
  const double rho = loss_from_finesse(45.0);
  const double p_sat = intracavity_power_w(0.87, 0.052, rho);
  const double gamma_p =
      pump_rate_mhz(intracavity_power_w(0.4, 0.052, rho), 0.3);
  const bool ok = std::abs(p_sat - 9.0) / 9.0 < 0.15 &&
                  std::abs(gamma_p - 0.3) / 0.3 < 0.30;
  report(2, "cavity power chain", ok,
         "P_cav=" + fmt(p_sat) + " W, Gamma_p=" + fmt(gamma_p) + " MHz");
}

void criterion_3_oracle_equivalence() {
  const auto p = model();
  double worst = 0.0;
  for (double beta : {0.5, 2.0, 16.7}) {
    ModulationConfig mod;
    mod.m_depth_mhz = 0.5;
    mod.nu_khz = 500.0 / beta;
    const auto d = drive_at(5.7, 6.0, true, p.a_par_mhz);
    std::vector<double> grid(201);
    for (int i = 0; i < 201; ++i) grid[i] = -6.0 + 12.0 * i / 200.0;
    const auto fast = lockin_spectrum(p, d, mod, grid, kGain, kV0);
    const auto slow = lockin_oracle(p, d, mod, grid, kGain, kV0);
    double peak = 0.0;
    for (const double v : slow.values) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      worst = std::max(worst,
                       std::abs(fast.values[i] - slow.values[i]) / peak);
    }
  }
  report(3, "lock-in oracle equivalence", worst < 1e-3,
         "max_rel_dev=" + fmt(worst));
}

void criterion_4_sidebands() {
  ModulationConfig mod;
  mod.m_depth_mhz = 0.501;
  mod.nu_khz = 30.0;  // beta = 16.7
  const auto sw = fm_sidebands(mod);
  double power = 0.0;
  for (const double j : sw.raw) power += j * j;
  const bool ok = sw.significant_count >= 16 && sw.significant_count <= 18 &&
                  std::abs(power - 1.0) < 1e-9;
  report(4, "sideband count and power sum", ok,
         "count=" + std::to_string(sw.significant_count) +
             " |power-1|=" + fmt(std::abs(power - 1.0)));
}

void criterion_5_slope_surface() {
  const auto p = model();
  ModulationConfig mod;
  // 21x21 log grid over the explored drive window; pump rates above
  // ~6 MHz push the weak-drive corner past its narrowing optimum, where
  // the measured trend claims no longer apply.
  const auto omegas = log_grid(0.1, 10.0, 21);
  const auto gps = log_grid(0.1, 6.0, 21);
  const auto surface = sweep_slope(p, omegas, gps, mod, kGain, kV0);

  bool interior = true, argmax_mono = true, nondecreasing = true;
  int prev_argmax = -1;
  for (std::size_t i = 0; i < gps.size(); ++i) {
    std::size_t am = 0;
    for (std::size_t j = 0; j < omegas.size(); ++j) {
      if (surface.slopes_v_per_mhz[i][j] > surface.slopes_v_per_mhz[i][am]) {
        am = j;
      }
    }
    if (am == 0 || am + 1 == omegas.size()) interior = false;
    if (static_cast<int>(am) < prev_argmax) argmax_mono = false;
    prev_argmax = static_cast<int>(am);
  }
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    for (std::size_t i = 1; i < gps.size(); ++i) {
      if (surface.slopes_v_per_mhz[i][j] <
          surface.slopes_v_per_mhz[i - 1][j]) {
        nondecreasing = false;
      }
    }
  }
  report(5, "slope surface shape", interior && argmax_mono && nondecreasing,
         std::string("interior=") + (interior ? "y" : "n") +
             " argmax_mono=" + (argmax_mono ? "y" : "n") +
             " nondecreasing=" + (nondecreasing ? "y" : "n"));
}

void criterion_6_sensitivity() {
  const auto p = model();
  ModulationConfig mod;
  const double slope = max_slope_at(p, 5.7, 6.0, true, mod);
  const double projected =
      sensitivity_t_per_rthz(slope, 80e-9, kGain, 28.0);
  const bool within_factor_2 = projected > 80e-12 && projected < 320e-12;

  // Algebraic inverse: the slope that gives exactly 160 pT/rtHz.
  const double slope_inv = kGain * 80e-9 / (160e-12 * 28e9 * 1e-6);
  const double back = sensitivity_t_per_rthz(slope_inv, 80e-9, kGain, 28.0);
  const bool inverse_ok = std::abs(back - 160e-12) / 160e-12 < 0.01;

  report(6, "sensitivity projection", within_factor_2 && inverse_ok,
         "projected=" + fmt(projected * 1e12) + " pT/rtHz (slope=" +
             fmt(slope) + " V/MHz), inverse=" + fmt(back * 1e12) + " pT");
}

void criterion_7_three_tone() {
  const auto p = model();
  ModulationConfig mod;
  const double single = max_slope_at(p, 5.7, 6.0, false, mod);
  const double three = max_slope_at(p, 5.7, 6.0, true, mod);
  const double ratio = three / single;
  report(7, "three-tone enhancement", ratio >= 1.5 && ratio <= 3.0,
         "ratio=" + fmt(ratio) + " (target band 2-2.5)");
}

void criterion_8_noise_pipeline() {
  FieldScenario white;
  white.white_noise_t_per_rthz = 2e-10;

  SensorOperatingPoint op;
  op.slope_v_per_mhz = 100.0;
  op.sample_rate_hz = 2000.0;
  op.electronic_noise_v_per_rthz = 0.0;
  op.seed = 101;

  // Wide-corner trace: the band of interest is unattenuated, so the ASD
  // and Allan statistics probe the raw white process.
  op.corner_freq_hz = 900.0;
  const auto flat_v = synthesize_trace(white, op, 250.0);
  const auto flat_t = volts_to_tesla(flat_v, op.slope_v_per_mhz,
                                     op.gamma_e_mhz_per_mt);
  const bool n_ok = flat_t.samples.size() == 500000;

  const auto spec = psd(flat_t, 8192, 0.5);
  std::vector<double> band;
  for (std::size_t k = 0; k < spec.freqs_hz.size(); ++k) {
    if (spec.freqs_hz[k] >= 10.0 && spec.freqs_hz[k] <= 100.0) {
      band.push_back(spec.asd[k]);
    }
  }
  std::sort(band.begin(), band.end());
  const double median = band[band.size() / 2];
  const bool flat_ok = std::abs(median - 2e-10) / 2e-10 < 0.10;

  const auto taus = default_tau_grid(flat_t);
  const auto allan = allan_deviation(flat_t, taus);
  const auto allan_fit = loglog_slope(allan.taus_s, allan.sigmas, 0.005, 1.0);
  const bool allan_ok = std::abs(allan_fit.slope + 0.5) < 0.05;

  // Filtered trace: first-order roll-off above twice the corner.
  op.corner_freq_hz = 159.0;
  op.seed = 102;
  const auto rolled = synthesize_trace(white, op, 250.0);
  const auto spec_rolled = psd(rolled, 8192, 0.5);
  const auto roll_fit =
      loglog_slope(spec_rolled.freqs_hz, spec_rolled.asd, 318.0, 1000.0);
  const double db_per_decade = 20.0 * roll_fit.slope;
  const bool roll_ok = std::abs(db_per_decade + 20.0) <= 2.0;

  report(8, "noise pipeline", n_ok && flat_ok && allan_ok && roll_ok,
         "asd_median=" + fmt(median) + " allan_slope=" + fmt(allan_fit.slope) +
             " rolloff=" + fmt(db_per_decade) + " dB/dec");
}

void criterion_9_extracted_sensitivity() {
  const double s = extract_sensitivity(6e-9, 0.2);
  const bool ok = std::abs(s - 2.683e-9) / 2.683e-9 < 1e-3 &&
                  std::abs(s - 3e-9) / 3e-9 < 0.15;
  report(9, "sensitivity extraction", ok, fmt(s * 1e9) + " nT/rtHz");
}

void criterion_10_beat() {
  FieldScenario scenario;
  scenario.tones.push_back({60.0, 2e-9, 0.0});
  scenario.hum.odd_harmonic_amps_t = {2e-9};

  SensorOperatingPoint op;
  op.slope_v_per_mhz = 100.0;
  op.corner_freq_hz = 159.0;
  op.sample_rate_hz = 2000.0;
  op.electronic_noise_v_per_rthz = 1e-6;
  op.seed = 103;

  const auto trace = synthesize_trace(scenario, op, 250.0);
  const double beat = beat_frequency_hz(trace, 2.0, 30.0, 20000);
  report(10, "10 Hz beat reproduction", std::abs(beat - 10.0) <= 0.2,
         "beat=" + fmt(beat) + " Hz");
}

void criterion_11_savitzky_golay() {
  // Brute-force least-squares oracle for the window-5 order-2 kernel.
  Eigen::MatrixXd v(5, 3);
  for (int i = 0; i < 5; ++i) {
    const double x = i - 2;
    v(i, 0) = 1.0;
    v(i, 1) = x;
    v(i, 2) = x * x;
  }
  const Eigen::VectorXd oracle = v * (v.transpose() * v).inverse().col(0);
  const double expected[5] = {-3.0 / 35, 12.0 / 35, 17.0 / 35, 12.0 / 35,
                              -3.0 / 35};

  double worst = 0.0;
  for (int tap = 0; tap < 5; ++tap) {
    std::vector<double> impulse(21, 0.0);
    impulse[8 + tap] = 1.0;
    const auto out = savitzky_golay(impulse, 5, 2);
    worst = std::max(worst, std::abs(out[10] - expected[4 - tap]));
    worst = std::max(worst, std::abs(oracle(tap) - expected[tap]));
  }
  report(11, "savitzky-golay kernel", worst < 1e-12,
         "max_abs_err=" + fmt(worst));
}

void criterion_12_spin_conservation() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_sum = 0.0;
  double worst_ode = 0.0;

  for (int trial = 0; trial < 100; ++trial) {
    SpinModelParams p{};
    p.k_r_mhz = 30.0 + 70.0 * u(rng);
    p.k_isc0_mhz = 1.0 + 14.0 * u(rng);
    p.k_isc1_mhz = p.k_isc0_mhz + 20.0 + 60.0 * u(rng);
    p.k_s0_mhz = 0.3 + 2.7 * u(rng);
    p.k_s1_mhz = 0.3 + 2.7 * u(rng);
    p.t1_spin_ms = 1.0 + 9.0 * u(rng);
    p.t2_star_us = 0.1 + 0.9 * u(rng);
    const double gamma_p = 0.1 + 9.9 * u(rng);
    const double w = 0.01 + 20.0 * u(rng);

    const auto pop = steady_state(p, gamma_p, w);
    worst_sum = std::max(worst_sum, std::abs(pop.sum() - 1.0));

    // ODE oracle: integrate the rate equations with an exact short-step
    // propagator until the state stops moving, then compare.
    const double r1 = 1.0 / (2.0 * p.t1_spin_ms * 1e3);
    Eigen::Matrix<double, 5, 5> a = Eigen::Matrix<double, 5, 5>::Zero();
    a(0, 0) = -(gamma_p + w + r1);
    a(0, 1) = w + r1;
    a(0, 2) = p.k_r_mhz;
    a(0, 4) = p.k_s0_mhz;
    a(1, 0) = w + r1;
    a(1, 1) = -(gamma_p + w + r1);
    a(1, 3) = p.k_r_mhz;
    a(1, 4) = p.k_s1_mhz;
    a(2, 0) = gamma_p;
    a(2, 2) = -(p.k_r_mhz + p.k_isc0_mhz);
    a(3, 1) = gamma_p;
    a(3, 3) = -(p.k_r_mhz + p.k_isc1_mhz);
    a(4, 2) = p.k_isc0_mhz;
    a(4, 3) = p.k_isc1_mhz;
    a(4, 4) = -(p.k_s0_mhz + p.k_s1_mhz);

    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    const Eigen::Matrix<double, 5, 5> a_tau = a * (0.5 / norm);
    Eigen::Matrix<double, 5, 5> step = Eigen::Matrix<double, 5, 5>::Identity();
    Eigen::Matrix<double, 5, 5> term = Eigen::Matrix<double, 5, 5>::Identity();
    for (int k = 1; k <= 24; ++k) {
      term = term * a_tau / static_cast<double>(k);
      step += term;
    }
    for (int s = 0; s < 12; ++s) step = step * step;

    Eigen::Matrix<double, 5, 1> n;
    n << 0.5, 0.5, 0.0, 0.0, 0.0;
    for (long it = 0; it < 2000000; ++it) {
      // The exact flow conserves the sum; renormalizing removes the
      // floating-point drift of the propagator's unit eigenvalue.
      Eigen::Matrix<double, 5, 1> next = step * n;
      next /= next.sum();
      if ((next - n).cwiseAbs().maxCoeff() < 1e-14) {
        n = next;
        break;
      }
      n = next;
    }

    Eigen::Matrix<double, 5, 1> solved;
    solved << pop.n_g0, pop.n_g1, pop.n_e0, pop.n_e1, pop.n_s;
    worst_ode = std::max(worst_ode, (solved - n).cwiseAbs().maxCoeff());
  }
  report(12, "spin-model conservation", worst_sum < 1e-12 && worst_ode < 1e-9,
         "sum_err=" + fmt(worst_sum) + " ode_err=" + fmt(worst_ode));
}

bool directories_byte_identical(const fs::path& a, const fs::path& b,
                                std::string& detail) {
  std::vector<fs::path> names;
  for (const auto& entry : fs::directory_iterator(a)) {
    names.push_back(entry.path().filename());
  }
  std::sort(names.begin(), names.end());
  std::size_t count = 0;
  for (const auto& name : names) {
    std::ifstream fa(a / name, std::ios::binary);
    std::ifstream fb(b / name, std::ios::binary);
    if (!fa || !fb) {
      detail = "missing " + name.string();
      return false;
    }
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (sa.str() != sb.str()) {
      detail = "differs: " + name.string();
      return false;
    }
    ++count;
  }
  detail = std::to_string(count) + " files identical";
  return count > 0;
}

void criterion_13_reproduce_determinism(const std::string& config_path) {
  const fs::path base = fs::temp_directory_path() / "nvmag_acceptance";
  fs::remove_all(base);
  const fs::path out_a = base / "a";
  const fs::path out_b = base / "b";

  const int rc_a = app::run_cli({"reproduce", "--config", config_path,
                                 "--seed", "424242", "--out-dir",
                                 out_a.string()});
  const int rc_b = app::run_cli({"reproduce", "--config", config_path,
                                 "--seed", "424242", "--out-dir",
                                 out_b.string()});
  std::string detail;
  bool identical = false;
  if (rc_a == 0 && rc_b == 0) {
    identical = directories_byte_identical(out_a, out_b, detail);
  } else {
    detail = "exit codes " + std::to_string(rc_a) + "/" + std::to_string(rc_b);
  }
  report(13, "reproduce determinism", identical, detail);
  fs::remove_all(base);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string config_path =
      argc > 1 ? argv[1] : "configs/example.ini";

  criterion_1_cavity_algebra();
  criterion_2_power_chain();
  criterion_3_oracle_equivalence();
  criterion_4_sidebands();
  criterion_5_slope_surface();
  criterion_6_sensitivity();
  criterion_7_three_tone();
  criterion_8_noise_pipeline();
  criterion_9_extracted_sensitivity();
  criterion_10_beat();
  criterion_11_savitzky_golay();
  criterion_12_spin_conservation();
  criterion_13_reproduce_determinism(config_path);

  if (failures == 0) {
    std::printf("all 13 acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", failures);
  return 1;
}
