#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nvmag/errors.hpp"
#include "nvmag/sensing.hpp"
#include "nvmag/units.hpp"

using namespace nvmag;

namespace {

SpinModelParams reference_params() {
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

}  // namespace

TEST_CASE("shot noise follows the square-root law") {
  CHECK(shot_noise_v_per_rthz(0.0, 0.7, 1e4) == 0.0);
  const double one = shot_noise_v_per_rthz(1e14, 0.7, 1e4);
  const double two = shot_noise_v_per_rthz(2e14, 0.7, 1e4);
  CHECK(two == doctest::Approx(std::sqrt(2.0) * one).epsilon(1e-12));

  // Manual chain: I = rate qe e, v = sqrt(2 e I) R.
  const double rate = 3.7e14;
  const double current = rate * 0.7 * units::electron_charge_c;
  const double expected =
      std::sqrt(2.0 * units::electron_charge_c * current) * 1e4;
  CHECK(shot_noise_v_per_rthz(rate, 0.7, 1e4) == doctest::Approx(expected));

  CHECK_THROWS_AS(shot_noise_v_per_rthz(1e14, 0.0, 1e4), ValidationError);
  CHECK_THROWS_AS(shot_noise_v_per_rthz(-1.0, 0.7, 1e4), ValidationError);
}

TEST_CASE("calibrated emitter rate reproduces the 58 nV shot level") {
  // Solve sqrt(2 e I) R = 58 nV at R = 10 kOhm for the detected rate,
  // then unwind the 1e9-emitter, 2%-collection chain.
  const double target = 58e-9;
  const double current = std::pow(target / 1e4, 2) /
                         (2.0 * units::electron_charge_c);
  const double rate_det = current / (0.7 * units::electron_charge_c);
  const double per_emitter_mhz = rate_det / (1e9 * 0.02) * 1e-6;
  CHECK(per_emitter_mhz == doctest::Approx(46.802).epsilon(1e-3));
  CHECK(shot_noise_v_per_rthz(1e9 * 0.02 * per_emitter_mhz * 1e6, 0.7, 1e4) ==
        doctest::Approx(target).epsilon(1e-9));
}

TEST_CASE("noise budget combines linearly or in quadrature") {
  const auto linear = noise_budget(58e-9, 7e-9, 13e-9);
  CHECK(linear.total_v == doctest::Approx(78e-9).epsilon(1e-12));

  const auto quad =
      noise_budget(58e-9, 7e-9, 13e-9, NoiseCombination::quadrature);
  CHECK(quad.total_v == doctest::Approx(59.8498e-9).epsilon(1e-4));

  CHECK(noise_budget(42e-9, 0.0, 0.0).total_v == doctest::Approx(42e-9));
  CHECK(noise_budget(42e-9, 0.0, 0.0, NoiseCombination::quadrature).total_v ==
        doctest::Approx(42e-9));
  CHECK_THROWS_AS(noise_budget(-1e-9, 0.0, 0.0), ValidationError);
}

TEST_CASE("sensitivity inverts to the bench operating point") {
  // Slope required for 160 pT/rtHz at A = 5e4, 80 nV, gamma_e = 28.
  const double slope = 5e4 * 80e-9 / (160e-12 * 28e9 * 1e-6);
  CHECK(slope == doctest::Approx(892.857).epsilon(1e-5));
  CHECK(sensitivity_t_per_rthz(slope, 80e-9, 5e4, 28.0) ==
        doctest::Approx(160e-12).epsilon(1e-9));
  CHECK(sensitivity_t_per_rthz(slope, 0.0, 5e4, 28.0) == 0.0);
  CHECK_THROWS_AS(sensitivity_t_per_rthz(0.0, 80e-9, 5e4, 28.0),
                  NumericalError);
}

TEST_CASE("sensitivity is homogeneous in noise and slope") {
  const double base = sensitivity_t_per_rthz(100.0, 50e-9, 5e4, 28.0);
  CHECK(sensitivity_t_per_rthz(100.0, 150e-9, 5e4, 28.0) ==
        doctest::Approx(3.0 * base).epsilon(1e-12));
  CHECK(sensitivity_t_per_rthz(300.0, 50e-9, 5e4, 28.0) ==
        doctest::Approx(base / 3.0).epsilon(1e-12));
}

TEST_CASE("lock-in gain cancels end to end") {
  const auto p = reference_params();
  ModulationConfig mod;
  DriveConfig d;
  d.gamma_p_mhz = 6.0;
  d.omega_rabi_mhz = 5.7;
  d.omega_0_mhz = 0.0;
  d.tones = three_tone_drive(0.0, p.a_par_mhz);

  std::vector<double> grid(401);
  for (int i = 0; i < 401; ++i) grid[i] = -8.0 + 16.0 * i / 400.0;

  for (const double gain : {5e4, 1e5}) {
    const auto s = lockin_spectrum(p, d, mod, grid, gain, 1.0);
    const double slope = max_slope(s).slope_v_per_mhz;
    const double db = sensitivity_t_per_rthz(slope, 80e-9, gain, 28.0);
    static double first_db = 0.0;
    if (gain == 5e4) {
      first_db = db;
    } else {
      CHECK(db == doctest::Approx(first_db).epsilon(1e-12));
    }
  }
}

TEST_CASE("degenerate sweep equals a direct slope evaluation") {
  const auto p = reference_params();
  ModulationConfig mod;
  const auto surface = sweep_slope(p, {5.7}, {6.0}, mod, 5e4, 1.0);
  REQUIRE(surface.slopes_v_per_mhz.size() == 1);
  REQUIRE(surface.slopes_v_per_mhz[0].size() == 1);

  DriveConfig d;
  d.gamma_p_mhz = 6.0;
  d.omega_rabi_mhz = 5.7;
  d.omega_0_mhz = 0.0;
  d.tones = three_tone_drive(0.0, p.a_par_mhz);
  const auto comps = resonance_components(p, d, 1.0);
  double gmax = 0.0;
  for (const auto& c : comps) gmax = std::max(gmax, c.hwhm_mhz);
  const double span = 2.0 * p.a_par_mhz + mod.m_depth_mhz + 6.0 * gmax;
  std::vector<double> grid(401);
  for (int i = 0; i < 401; ++i) grid[i] = -span + 2.0 * span * i / 400.0;
  const auto direct =
      max_slope(lockin_spectrum(p, d, mod, grid, 5e4, 1.0)).slope_v_per_mhz;
  CHECK(surface.slopes_v_per_mhz[0][0] == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("sweep output does not depend on grid ordering") {
  const auto p = reference_params();
  ModulationConfig mod;
  const std::vector<double> omegas{0.5, 2.0, 6.0};
  const std::vector<double> gps{0.3, 3.0};
  const auto forward = sweep_slope(p, omegas, gps, mod, 5e4, 1.0);

  std::vector<double> omegas_rev(omegas.rbegin(), omegas.rend());
  std::vector<double> gps_rev(gps.rbegin(), gps.rend());
  const auto backward = sweep_slope(p, omegas_rev, gps_rev, mod, 5e4, 1.0);

  for (std::size_t i = 0; i < gps.size(); ++i) {
    for (std::size_t j = 0; j < omegas.size(); ++j) {
      CHECK(forward.slopes_v_per_mhz[i][j] ==
            doctest::Approx(
                backward.slopes_v_per_mhz[gps.size() - 1 - i]
                                         [omegas.size() - 1 - j])
                .epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(sweep_slope(p, {}, gps, mod, 5e4, 1.0), ValidationError);
}

TEST_CASE("slope rises with pump and peaks inside the Rabi range") {
  const auto p = reference_params();
  ModulationConfig mod;
  const auto omegas = log_grid(0.1, 10.0, 9);
  const auto gps = log_grid(0.1, 6.0, 5);
  const auto s = sweep_slope(p, omegas, gps, mod, 5e4, 1.0);

  for (std::size_t i = 0; i < gps.size(); ++i) {
    std::size_t am = 0;
    for (std::size_t j = 0; j < omegas.size(); ++j) {
      if (s.slopes_v_per_mhz[i][j] > s.slopes_v_per_mhz[i][am]) am = j;
    }
    CHECK(am > 0);
    CHECK(am + 1 < omegas.size());
  }
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    for (std::size_t i = 1; i < gps.size(); ++i) {
      CHECK(s.slopes_v_per_mhz[i][j] >=
            s.slopes_v_per_mhz[i - 1][j] * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("log grid spans its endpoints") {
  const auto g = log_grid(0.1, 10.0, 21);
  REQUIRE(g.size() == 21);
  CHECK(g.front() == doctest::Approx(0.1));
  CHECK(g.back() == doctest::Approx(10.0));
  CHECK(g[10] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 5), ValidationError);
}

TEST_CASE("unit conversions") {
  CHECK(units::mhz_per_mt_to_hz_per_t(28.0) == doctest::Approx(2.8e10));
  CHECK(units::v_per_mhz_to_v_per_hz(893.0) == doctest::Approx(8.93e-4));
  CHECK(units::volts_per_tesla(100.0, 28.0) == doctest::Approx(2.8e6));
  CHECK(units::khz_to_mhz(30.0) == doctest::Approx(0.03));
}
