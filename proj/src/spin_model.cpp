#include "nvmag/spin_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "nvmag/errors.hpp"
#include "nvmag/units.hpp"

namespace nvmag {

void SpinModelParams::validate() const {
  if (!(k_r_mhz > 0) || !(k_isc0_mhz > 0) || !(k_isc1_mhz > 0) ||
      !(k_s0_mhz > 0) || !(k_s1_mhz > 0)) {
    throw ValidationError("spin model: all rates must be strictly positive");
  }
  if (!(k_isc1_mhz > k_isc0_mhz)) {
    throw ValidationError(
        "spin model: k_isc1 must exceed k_isc0 (no contrast otherwise)");
  }
  if (!(t1_spin_ms > 0) || !(t2_star_us > 0)) {
    throw ValidationError("spin model: t1_spin and t2_star must be positive");
  }
  if (!(a_par_mhz >= 0) || !(gamma_e_mhz_per_mt > 0)) {
    throw ValidationError("spin model: invalid a_par or gamma_e");
  }
}

void DriveConfig::validate() const {
  if (gamma_p_mhz < 0 || omega_rabi_mhz < 0) {
    throw ValidationError("drive: gamma_p and omega_rabi must be >= 0");
  }
  if (tones.empty()) {
    throw ValidationError("drive: tones must be nonempty (use {0})");
  }
}

double dephasing_hwhm_mhz(double t2_star_us) {
  if (!(t2_star_us > 0)) {
    throw ValidationError("mw_rate: t2_star must be positive");
  }
  return 1.0 / (2.0 * units::pi * t2_star_us);
}

double mw_rate(double omega_rabi_mhz, double delta_mhz, double t2_star_us) {
  const double g2 = dephasing_hwhm_mhz(t2_star_us);
  const double o2 = omega_rabi_mhz * omega_rabi_mhz;
  return o2 * g2 / (2.0 * (delta_mhz * delta_mhz + g2 * g2));
}

PopulationVector steady_state(const SpinModelParams& p, double gamma_p_mhz,
                              double w_mw_mhz) {
  p.validate();
  if (gamma_p_mhz < 0 || w_mw_mhz < 0) {
    throw ValidationError("steady_state: negative rate");
  }

  // t1 mixes g0 <-> g1 at 1/(2 T1) each way; T1 is in ms, rates in 1/us.
  const double r1 = 1.0 / (2.0 * p.t1_spin_ms * 1e3);
  const double w = w_mw_mhz;

  // State order: g0, g1, e0, e1, s.
  Eigen::Matrix<double, 5, 5> a = Eigen::Matrix<double, 5, 5>::Zero();
  // g0
  a(0, 0) = -(gamma_p_mhz + w + r1);
  a(0, 1) = w + r1;
  a(0, 2) = p.k_r_mhz;
  a(0, 4) = p.k_s0_mhz;
  // g1
  a(1, 0) = w + r1;
  a(1, 1) = -(gamma_p_mhz + w + r1);
  a(1, 3) = p.k_r_mhz;
  a(1, 4) = p.k_s1_mhz;
  // e0
  a(2, 0) = gamma_p_mhz;
  a(2, 2) = -(p.k_r_mhz + p.k_isc0_mhz);
  // e1
  a(3, 1) = gamma_p_mhz;
  a(3, 3) = -(p.k_r_mhz + p.k_isc1_mhz);
  // s
  a(4, 2) = p.k_isc0_mhz;
  a(4, 3) = p.k_isc1_mhz;
  a(4, 4) = -(p.k_s0_mhz + p.k_s1_mhz);

  // Columns sum to zero, so the rows are rank deficient by one; replace
  // the last row with population conservation.
  a.row(4).setOnes();
  Eigen::Matrix<double, 5, 1> b = Eigen::Matrix<double, 5, 1>::Zero();
  b(4) = 1.0;

  // Rates span several orders of magnitude; equilibrate rows, then
  // polish the solution with iterative refinement.
  for (int r = 0; r < 5; ++r) {
    const double scale = a.row(r).cwiseAbs().maxCoeff();
    if (scale > 0) {
      a.row(r) /= scale;
      b(r) /= scale;
    }
  }

  Eigen::FullPivLU<Eigen::Matrix<double, 5, 5>> lu(a);
  if (!lu.isInvertible()) {
    throw NumericalError("steady_state: degenerate rate model");
  }
  Eigen::Matrix<double, 5, 1> n = lu.solve(b);
  for (int refine = 0; refine < 3; ++refine) {
    const Eigen::Matrix<double, 5, 1> residual = b - a * n;
    n += lu.solve(residual);
  }

  for (int i = 0; i < 5; ++i) {
    if (n(i) < 0 && n(i) > -1e-12) n(i) = 0.0;
  }
  const double total = n.sum();
  if (!(total > 0)) {
    throw NumericalError("steady_state: non-physical solution");
  }
  n /= total;

  PopulationVector pop;
  pop.n_g0 = n(0);
  pop.n_g1 = n(1);
  pop.n_e0 = n(2);
  pop.n_e1 = n(3);
  pop.n_s = n(4);
  return pop;
}

double fluorescence(const PopulationVector& pop, double k_r_mhz) {
  return k_r_mhz * pop.excited();
}

LineShape single_line_shape(const SpinModelParams& p, double gamma_p_mhz,
                            double w0_mhz) {
  const double g2 = dephasing_hwhm_mhz(p.t2_star_us);
  const double i_dark = steady_state(p, gamma_p_mhz, 0.0).excited();

  if (w0_mhz <= 0.0) {
    return {0.0, g2};
  }

  const double deficit0 = i_dark - steady_state(p, gamma_p_mhz, w0_mhz).excited();
  if (deficit0 <= 0.0) {
    return {0.0, g2};
  }

  // W(delta) is Lorentzian in delta, so the dip half point sits where the
  // mixing rate has dropped to w_half with deficit(w_half) = deficit0/2.
  // deficit(w) is monotone in w; bisect for w_half.
  double lo = 0.0;
  double hi = w0_mhz;
  const double target = 0.5 * deficit0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double d = i_dark - steady_state(p, gamma_p_mhz, mid).excited();
    if (d < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-14 * w0_mhz) break;
  }
  const double w_half = 0.5 * (lo + hi);
  const double ratio = std::max(w0_mhz / w_half - 1.0, 0.0);
  return {deficit0, g2 * std::sqrt(ratio)};
}

std::vector<LineComponent> resonance_components(const SpinModelParams& p,
                                                const DriveConfig& drive,
                                                double v0_volts) {
  p.validate();
  drive.validate();
  if (!(v0_volts > 0)) {
    throw ValidationError("cw_spectrum: v0 must be positive");
  }

  const double g2 = dephasing_hwhm_mhz(p.t2_star_us);
  const double w_single = mw_rate(drive.omega_rabi_mhz, 0.0, p.t2_star_us);

  std::vector<LineComponent> comps;
  comps.reserve(3 * drive.tones.size());
  for (const int m_i : {-1, 0, 1}) {
    for (std::size_t t = 0; t < drive.tones.size(); ++t) {
      // Relative rate contribution of every tone at this pair's resonance;
      // the tone's own share weights the Lorentzian so coincident tones
      // reduce exactly to a single rescaled drive.
      double rate_sum = 0.0;
      for (std::size_t u = 0; u < drive.tones.size(); ++u) {
        const double d = drive.tones[u] - drive.tones[t];
        rate_sum += g2 * g2 / (d * d + g2 * g2);
      }
      const LineShape shape =
          single_line_shape(p, drive.gamma_p_mhz, w_single * rate_sum);
      LineComponent c;
      c.center_mhz = drive.omega_0_mhz - m_i * p.a_par_mhz - drive.tones[t];
      c.amplitude_v = v0_volts * shape.deficit / rate_sum;
      c.hwhm_mhz = shape.hwhm_mhz;
      comps.push_back(c);
    }
  }
  return comps;
}

double cw_value(const std::vector<LineComponent>& components,
                double freq_mhz) {
  double s = 0.0;
  for (const auto& c : components) {
    const double d = freq_mhz - c.center_mhz;
    const double g2 = c.hwhm_mhz * c.hwhm_mhz;
    s += c.amplitude_v * g2 / (d * d + g2);
  }
  return s;
}

Spectrum cw_spectrum(const SpinModelParams& p, const DriveConfig& drive,
                     const std::vector<double>& freq_grid_mhz,
                     double v0_volts) {
  if (freq_grid_mhz.empty()) {
    throw ValidationError("cw_spectrum: empty frequency grid");
  }
  if (!std::is_sorted(freq_grid_mhz.begin(), freq_grid_mhz.end(),
                      std::less_equal<double>())) {
    throw ValidationError("cw_spectrum: grid must be strictly increasing");
  }
  const auto comps = resonance_components(p, drive, v0_volts);
  Spectrum s;
  s.freqs_mhz = freq_grid_mhz;
  s.values.reserve(freq_grid_mhz.size());
  for (const double f : freq_grid_mhz) {
    s.values.push_back(cw_value(comps, f));
  }
  s.units = SignalUnits::volts;
  return s;
}

double linewidth_hwhm_mhz(const Spectrum& spectrum) {
  const auto& f = spectrum.freqs_mhz;
  const auto& v = spectrum.values;
  if (f.size() < 5 || f.size() != v.size()) {
    throw ValidationError("linewidth: need a sampled spectrum");
  }

  std::size_t imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[imax]) imax = i;
  }
  const double peak = v[imax];
  if (!(peak > 0) || imax == 0 || imax + 1 == v.size()) {
    throw NumericalError("linewidth: no resolvable dip");
  }
  const double half = 0.5 * peak;

  auto cross = [&](bool left) -> double {
    if (left) {
      for (std::size_t i = imax; i-- > 0;) {
        if (v[i] <= half) {
          const double t = (half - v[i]) / (v[i + 1] - v[i]);
          return f[i] + t * (f[i + 1] - f[i]);
        }
      }
    } else {
      for (std::size_t i = imax + 1; i < v.size(); ++i) {
        if (v[i] <= half) {
          const double t = (v[i - 1] - half) / (v[i - 1] - v[i]);
          return f[i - 1] + t * (f[i] - f[i - 1]);
        }
      }
    }
    throw NumericalError("linewidth: half crossing outside the grid");
  };

  const double fl = cross(true);
  const double fr = cross(false);
  return 0.5 * (fr - fl);
}

double zeeman_shift_mhz(double b_par_mt, double projection_angle_deg,
                        double gamma_e_mhz_per_mt) {
  if (!(gamma_e_mhz_per_mt > 0)) {
    throw ValidationError("zeeman_shift: gamma_e must be positive");
  }
  const double rad = projection_angle_deg * units::pi / 180.0;
  return gamma_e_mhz_per_mt * b_par_mt * std::cos(rad);
}

double thermal_shift_khz(double delta_t_kelvin) {
  return -74.2 * delta_t_kelvin;
}

}  // namespace nvmag
