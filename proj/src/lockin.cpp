#include "nvmag/lockin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "nvmag/errors.hpp"
#include "nvmag/units.hpp"

namespace nvmag {

namespace {

double bessel_j(int n, double x) {
  const int an = std::abs(n);
  double v = std::cyl_bessel_j(static_cast<double>(an), x);
  if (n < 0 && (an % 2) == 1) v = -v;
  return v;
}

// Positive Chebyshev-Gauss nodes and weights for the demodulation
// integral: with u = cos(theta), the period average of s(f + m cos
// theta) * 2 cos(theta) is (2/pi) Int_{-1}^{1} s(f + m u) u / sqrt(1-u^2)
// du, so nodes pair antisymmetrically around the carrier.
struct QuadNodes {
  std::vector<double> u;  // in (0, 1), descending
  std::vector<double> w;  // per +/- pair
};

QuadNodes chebyshev_pairs(int n_pos) {
  QuadNodes q;
  const int k_total = 2 * n_pos;
  for (int k = 1; k <= n_pos; ++k) {
    q.u.push_back(std::cos((2.0 * k - 1.0) * units::pi / (2.0 * k_total)));
    q.w.push_back(q.u.back() / n_pos);
  }
  return q;
}

int node_count(double beta, SidebandTruncation trunc) {
  // Matches the sideband-sum truncation order, with a floor that keeps
  // the quadrature converged for small beta.
  const int from_beta = trunc == SidebandTruncation::half_beta
                            ? static_cast<int>(std::ceil(beta / 2.0)) + 1
                            : static_cast<int>(std::ceil(beta)) + 1;
  const int floor_nodes = trunc == SidebandTruncation::half_beta ? 8 : 16;
  return std::max(from_beta, floor_nodes);
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) {
    throw ValidationError("lockin: empty frequency grid");
  }
}

}  // namespace

void ModulationConfig::validate() const {
  if (!(nu_khz > 0)) {
    throw ValidationError("modulation: nu must be positive");
  }
  if (m_depth_mhz < 0) {
    throw ValidationError("modulation: depth must be >= 0");
  }
  if (n_max >= 0 && n_max < static_cast<int>(std::ceil(beta()))) {
    throw ValidationError("modulation: n_max below ceil(beta), truncated");
  }
}

int ModulationConfig::effective_n_max() const {
  if (n_max >= 0) return n_max;
  return static_cast<int>(std::ceil(beta())) + 30;
}

SidebandWeights fm_sidebands(const ModulationConfig& mod) {
  mod.validate();
  const double beta = mod.beta();
  const int n = mod.effective_n_max();

  SidebandWeights sw;
  sw.orders.reserve(2 * n + 1);
  sw.raw.reserve(2 * n + 1);
  double max_abs = 0.0;
  for (int k = -n; k <= n; ++k) {
    sw.orders.push_back(k);
    sw.raw.push_back(bessel_j(k, beta));
    max_abs = std::max(max_abs, std::abs(sw.raw.back()));
  }
  sw.weights.resize(sw.raw.size());
  for (std::size_t i = 0; i < sw.raw.size(); ++i) {
    sw.weights[i] = sw.raw[i] / max_abs;
  }

  // Smallest order containing 99% of the total power.
  const double j0 = bessel_j(0, beta);
  double cumulative = j0 * j0;
  int significant = 0;
  while (cumulative < 0.99 && significant < n) {
    ++significant;
    const double jk = bessel_j(significant, beta);
    cumulative += 2.0 * jk * jk;
  }
  sw.significant_count = significant;
  return sw;
}

Spectrum lockin_spectrum(const SpinModelParams& params,
                         const DriveConfig& drive, const ModulationConfig& mod,
                         const std::vector<double>& freq_grid_mhz,
                         double gain_a, double v0_volts,
                         SidebandTruncation trunc) {
  mod.validate();
  check_grid(freq_grid_mhz);

  const auto comps = resonance_components(params, drive, v0_volts);
  const double m = mod.m_depth_mhz;
  const QuadNodes q = chebyshev_pairs(node_count(mod.beta(), trunc));

  Spectrum s;
  s.freqs_mhz = freq_grid_mhz;
  s.values.reserve(freq_grid_mhz.size());
  for (const double fc : freq_grid_mhz) {
    double acc = 0.0;
    for (std::size_t k = 0; k < q.u.size(); ++k) {
      const double df = m * q.u[k];
      acc += q.w[k] * (cw_value(comps, fc + df) - cw_value(comps, fc - df));
    }
    s.values.push_back(gain_a * acc);
  }
  s.units = SignalUnits::volts;
  return s;
}

Spectrum lockin_oracle(const SpinModelParams& params, const DriveConfig& drive,
                       const ModulationConfig& mod,
                       const std::vector<double>& freq_grid_mhz, double gain_a,
                       double v0_volts, OracleOptions opts) {
  mod.validate();
  check_grid(freq_grid_mhz);
  if (opts.samples_per_period < 64) {
    throw ValidationError("lockin_oracle: fewer than 64 samples per period");
  }
  if (opts.periods < 50) {
    throw ValidationError("lockin_oracle: fewer than 50 modulation periods");
  }

  const auto comps = resonance_components(params, drive, v0_volts);
  const double m = mod.m_depth_mhz;
  const long total = static_cast<long>(opts.periods) * opts.samples_per_period;

  Spectrum s;
  s.freqs_mhz = freq_grid_mhz;
  s.values.reserve(freq_grid_mhz.size());
  for (const double fc : freq_grid_mhz) {
    double acc = 0.0;
    for (long j = 0; j < total; ++j) {
      const double theta =
          2.0 * units::pi * (j + 0.5) / opts.samples_per_period;
      const double c = std::cos(theta);
      acc += cw_value(comps, fc + m * c) * 2.0 * c;
    }
    s.values.push_back(gain_a * acc / static_cast<double>(total));
  }
  s.units = SignalUnits::volts;
  return s;
}

std::vector<double> three_tone_drive(double /*omega_c_mhz*/,
                                     double a_par_mhz) {
  if (a_par_mhz < 0) {
    throw ValidationError("three_tone_drive: a_par must be >= 0");
  }
  return {-a_par_mhz, 0.0, a_par_mhz};
}

SlopePoint max_slope(const Spectrum& spectrum) {
  const auto& f = spectrum.freqs_mhz;
  const auto& v = spectrum.values;
  if (f.size() < 3 || f.size() != v.size()) {
    throw ValidationError("max_slope: need at least 3 grid points");
  }
  SlopePoint best;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    const double d = std::abs((v[i + 1] - v[i - 1]) / (f[i + 1] - f[i - 1]));
    if (d > best.slope_v_per_mhz) {
      best.slope_v_per_mhz = d;
      best.freq_mhz = f[i];
    }
  }
  return best;
}

}  // namespace nvmag
