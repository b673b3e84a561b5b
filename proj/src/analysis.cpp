#include "nvmag/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "nvmag/errors.hpp"
#include "nvmag/fft.hpp"
#include "nvmag/least_squares.hpp"
#include "nvmag/units.hpp"

namespace nvmag {

std::vector<double> hann_window(std::size_t len) {
  std::vector<double> w(len);
  for (std::size_t j = 0; j < len; ++j) {
    w[j] = 0.5 * (1.0 - std::cos(2.0 * units::pi * static_cast<double>(j) /
                                 static_cast<double>(len)));
  }
  return w;
}

NoisePSD psd(const TimeTrace& trace, std::size_t segment_len,
             double overlap_fraction) {
  const std::size_t n = trace.samples.size();
  if (segment_len < 8 || segment_len > n) {
    throw ValidationError("psd: segment length out of range");
  }
  if (overlap_fraction < 0 || overlap_fraction > 0.9) {
    throw ValidationError("psd: overlap fraction must lie in [0, 0.9]");
  }

  const auto w = hann_window(segment_len);
  double w2 = 0;
  for (const double x : w) w2 += x * x;

  const std::size_t hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(segment_len * (1.0 - overlap_fraction))));
  const std::size_t bins = segment_len / 2 + 1;
  std::vector<double> power(bins, 0.0);
  int count = 0;
  std::vector<double> seg(segment_len);
  for (std::size_t start = 0; start + segment_len <= n; start += hop) {
    for (std::size_t j = 0; j < segment_len; ++j) {
      seg[j] = trace.samples[start + j] * w[j];
    }
    const auto spec = rfft(seg);
    for (std::size_t k = 0; k < bins; ++k) {
      // One-sided density; the DC and Nyquist bins are not doubled.
      const double two = (k == 0 || (segment_len % 2 == 0 && k == bins - 1))
                             ? 1.0
                             : 2.0;
      power[k] += two * std::norm(spec[k]) / (trace.sample_rate_hz * w2);
    }
    ++count;
  }
  if (count == 0) {
    throw ValidationError("psd: trace shorter than one segment");
  }

  NoisePSD out;
  out.n_averages = count;
  out.freqs_hz.resize(bins);
  out.asd.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    out.freqs_hz[k] = trace.sample_rate_hz * static_cast<double>(k) /
                      static_cast<double>(segment_len);
    out.asd[k] = std::sqrt(power[k] / count);
  }
  return out;
}

namespace {

// Least-squares polynomial value at `at`, fitted over samples
// series[first..last] with abscissa (index - center).
double local_poly_fit(const std::vector<double>& series, std::size_t first,
                      std::size_t last, std::size_t center, int order,
                      double at) {
  const int npts = static_cast<int>(last - first + 1);
  const int deg = std::min(order, npts - 1);
  Eigen::MatrixXd v(npts, deg + 1);
  Eigen::VectorXd y(npts);
  for (int i = 0; i < npts; ++i) {
    const double x = static_cast<double>(first + i) - static_cast<double>(center);
    double p = 1.0;
    for (int c = 0; c <= deg; ++c) {
      v(i, c) = p;
      p *= x;
    }
    y(i) = series[first + i];
  }
  const Eigen::VectorXd coeff = v.colPivHouseholderQr().solve(y);
  double result = 0.0;
  double p = 1.0;
  for (int c = 0; c <= deg; ++c) {
    result += coeff(c) * p;
    p *= at;
  }
  return result;
}

}  // namespace

std::vector<double> savitzky_golay(const std::vector<double>& series,
                                   int window, int order) {
  if (window < 3 || window % 2 == 0) {
    throw ValidationError("savitzky_golay: window must be odd and >= 3");
  }
  if (order < 0 || order >= window) {
    throw ValidationError("savitzky_golay: order must satisfy 0 <= order < window");
  }
  const std::size_t n = series.size();
  if (n < static_cast<std::size_t>(window)) {
    throw ValidationError("savitzky_golay: series shorter than the window");
  }
  const int h = window / 2;

  // Interior convolution kernel: center row of the projection matrix.
  Eigen::MatrixXd v(window, order + 1);
  for (int i = 0; i < window; ++i) {
    const double x = i - h;
    double p = 1.0;
    for (int c = 0; c <= order; ++c) {
      v(i, c) = p;
      p *= x;
    }
  }
  const Eigen::MatrixXd vtv_inv = (v.transpose() * v).inverse();
  const Eigen::VectorXd kernel = v * vtv_inv.col(0);  // row for x = 0

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= static_cast<std::size_t>(h) && i + h < n) {
      double acc = 0.0;
      for (int j = -h; j <= h; ++j) {
        acc += kernel(j + h) * series[i + j];
      }
      out[i] = acc;
    } else {
      const std::size_t first = i >= static_cast<std::size_t>(h) ? i - h : 0;
      const std::size_t last = std::min(n - 1, i + h);
      out[i] = local_poly_fit(series, first, last, i, order, 0.0);
    }
  }
  return out;
}

AllanCurve allan_deviation(const TimeTrace& trace,
                           const std::vector<double>& taus_s,
                           AllanCurve::Estimator estimator) {
  const std::size_t n = trace.samples.size();
  const double fs = trace.sample_rate_hz;
  if (n < 6 || !(fs > 0)) {
    throw ValidationError("allan_deviation: trace too short");
  }
  const double duration = static_cast<double>(n) / fs;

  // Prefix sums make every bin average O(1).
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + trace.samples[i];
  }
  auto bin_mean = [&](std::size_t start, std::size_t m) {
    return (prefix[start + m] - prefix[start]) / static_cast<double>(m);
  };

  AllanCurve curve;
  curve.estimator = estimator;
  for (const double tau : taus_s) {
    const std::size_t m = static_cast<std::size_t>(std::llround(tau * fs));
    if (m < 2 || tau > duration / 3.0) {
      throw ValidationError("allan_deviation: tau outside [2/fs, duration/3]");
    }
    double acc = 0.0;
    std::size_t terms = 0;
    if (estimator == AllanCurve::Estimator::overlapping) {
      for (std::size_t k = 0; k + 2 * m <= n; ++k) {
        const double d = bin_mean(k + m, m) - bin_mean(k, m);
        acc += d * d;
        ++terms;
      }
    } else {
      for (std::size_t k = 0; k + 2 * m <= n; k += m) {
        const double d = bin_mean(k + m, m) - bin_mean(k, m);
        acc += d * d;
        ++terms;
      }
    }
    if (terms == 0) {
      throw ValidationError("allan_deviation: no bins at requested tau");
    }
    curve.taus_s.push_back(static_cast<double>(m) / fs);
    curve.sigmas.push_back(std::sqrt(acc / (2.0 * static_cast<double>(terms))));
  }
  return curve;
}

std::vector<double> default_tau_grid(const TimeTrace& trace) {
  const double fs = trace.sample_rate_hz;
  const double lo = 2.0 / fs;
  const double hi = static_cast<double>(trace.samples.size()) / fs / 3.0;
  std::vector<double> taus;
  std::size_t last_m = 0;
  for (double t = lo; t <= hi * (1 + 1e-12); t *= std::pow(10.0, 1.0 / 20.0)) {
    const std::size_t m = static_cast<std::size_t>(std::llround(t * fs));
    if (m >= 2 && m != last_m && static_cast<double>(m) / fs <= hi) {
      taus.push_back(static_cast<double>(m) / fs);
      last_m = m;
    }
  }
  return taus;
}

double extract_sensitivity(double sigma_t, double tau_s) {
  if (!(tau_s > 0)) {
    throw ValidationError("extract_sensitivity: tau must be positive");
  }
  return sigma_t * std::sqrt(tau_s);
}

LogLogFit loglog_slope(const std::vector<double>& x,
                       const std::vector<double>& y, double x_min,
                       double x_max) {
  if (x.size() != y.size()) {
    throw ValidationError("loglog_slope: x and y lengths differ");
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < x_min || x[i] > x_max) continue;
    if (!(x[i] > 0) || !(y[i] > 0)) {
      throw ValidationError("loglog_slope: nonpositive value in range");
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const std::size_t n = lx.size();
  if (n < 3) {
    throw ValidationError("loglog_slope: fewer than 3 points in range");
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;

  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (intercept + slope * lx[i]);
    ss_res += r * r;
  }
  LogLogFit fit;
  fit.slope = slope;
  fit.n_points = static_cast<int>(n);
  fit.std_error =
      n > 2 ? std::sqrt(ss_res / static_cast<double>(n - 2) * n / denom) : 0.0;
  return fit;
}

std::vector<double> detrend_linear(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 2) return series;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i);
    sx += x;
    sy += series[i];
    sxx += x * x;
    sxy += x * series[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = series[i] - (intercept + slope * static_cast<double>(i));
  }
  return out;
}

double beat_frequency_hz(const TimeTrace& trace, double f_lo, double f_hi,
                         std::size_t segment_len) {
  if (!(f_lo > 0) || !(f_hi > f_lo)) {
    throw ValidationError("beat_frequency: need 0 < f_lo < f_hi");
  }
  TimeTrace squared = trace;
  squared.samples = detrend_linear(trace.samples);
  for (double& s : squared.samples) s *= s;
  squared.samples = detrend_linear(squared.samples);

  const NoisePSD spec = psd(squared, segment_len, 0.5);
  double best_f = 0;
  double best_a = -1;
  for (std::size_t k = 0; k < spec.freqs_hz.size(); ++k) {
    if (spec.freqs_hz[k] < f_lo || spec.freqs_hz[k] > f_hi) continue;
    if (spec.asd[k] > best_a) {
      best_a = spec.asd[k];
      best_f = spec.freqs_hz[k];
    }
  }
  if (best_a < 0) {
    throw NumericalError("beat_frequency: no bins inside the search band");
  }
  return best_f;
}

LorentzianSumFit fit_lorentzian_sum(const Spectrum& spectrum, int n_peaks,
                                    const std::vector<LorentzianPeak>& guess,
                                    double baseline_guess) {
  if (n_peaks < 1 || guess.size() != static_cast<std::size_t>(n_peaks)) {
    throw ValidationError("fit_lorentzian_sum: guess must supply every peak");
  }
  const std::size_t m = spectrum.freqs_mhz.size();
  if (m < static_cast<std::size_t>(3 * n_peaks + 1) ||
      m != spectrum.values.size()) {
    throw ValidationError("fit_lorentzian_sum: spectrum under-determined");
  }

  // Parameter layout: baseline, then (amplitude, center, hwhm) per peak;
  // the width enters squared so its sign is immaterial.
  auto model = [&](const Eigen::VectorXd& p, double f) {
    double s = p(0);
    for (int k = 0; k < n_peaks; ++k) {
      const double a = p(1 + 3 * k);
      const double c = p(2 + 3 * k);
      const double g = p(3 + 3 * k);
      const double d = f - c;
      s += a * g * g / (d * d + g * g);
    }
    return s;
  };
  auto residuals = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(m);
    for (std::size_t i = 0; i < m; ++i) {
      r(i) = model(p, spectrum.freqs_mhz[i]) - spectrum.values[i];
    }
    return r;
  };
  auto jacobian = [&](const Eigen::VectorXd& p) {
    Eigen::MatrixXd j(m, p.size());
    for (std::size_t i = 0; i < m; ++i) {
      const double f = spectrum.freqs_mhz[i];
      j(i, 0) = 1.0;
      for (int k = 0; k < n_peaks; ++k) {
        const double a = p(1 + 3 * k);
        const double c = p(2 + 3 * k);
        const double g = p(3 + 3 * k);
        const double d = f - c;
        const double denom = d * d + g * g;
        j(i, 1 + 3 * k) = g * g / denom;
        j(i, 2 + 3 * k) = 2.0 * a * g * g * d / (denom * denom);
        j(i, 3 + 3 * k) = 2.0 * a * g * d * d / (denom * denom);
      }
    }
    return j;
  };

  Eigen::VectorXd x0(1 + 3 * n_peaks);
  x0(0) = baseline_guess;
  for (int k = 0; k < n_peaks; ++k) {
    x0(1 + 3 * k) = guess[k].amplitude;
    x0(2 + 3 * k) = guess[k].center_mhz;
    x0(3 + 3 * k) = guess[k].hwhm_mhz;
  }

  const LmResult lm = levenberg_marquardt(residuals, jacobian, x0);
  if (!lm.converged) {
    throw NumericalError("fit_lorentzian_sum: no convergence after " +
                         std::to_string(lm.iterations) +
                         " iterations, residual " +
                         std::to_string(lm.residual_norm));
  }

  LorentzianSumFit fit;
  fit.baseline = lm.params(0);
  for (int k = 0; k < n_peaks; ++k) {
    LorentzianPeak pk;
    pk.amplitude = lm.params(1 + 3 * k);
    pk.center_mhz = lm.params(2 + 3 * k);
    pk.hwhm_mhz = std::abs(lm.params(3 + 3 * k));
    fit.peaks.push_back(pk);
  }
  fit.residual_norm = lm.residual_norm;
  fit.covariance_diag.assign(lm.covariance_diag.data(),
                             lm.covariance_diag.data() + lm.covariance_diag.size());
  fit.iterations = lm.iterations;
  return fit;
}

}  // namespace nvmag
