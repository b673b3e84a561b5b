#pragma once

#include <cstddef>
#include <vector>

#include "nvmag/spin_model.hpp"
#include "nvmag/trace.hpp"

namespace nvmag {

// One-sided amplitude spectral density in trace units per sqrt(Hz).
struct NoisePSD {
  std::vector<double> freqs_hz;
  std::vector<double> asd;
  int n_averages = 0;
};

// Welch estimate with a periodic Hann window, power-compensated by
// sum(w^2): segments of `segment_len` samples, overlapping by
// `overlap_fraction`, periodograms averaged.
NoisePSD psd(const TimeTrace& trace, std::size_t segment_len,
             double overlap_fraction);

// Hann window as used by psd(); exposed for golden tests.
std::vector<double> hann_window(std::size_t len);

// Local least-squares polynomial smoothing. Interior points use the
// closed convolution kernel; edges refit the polynomial on the
// truncated one-sided window.
std::vector<double> savitzky_golay(const std::vector<double>& series,
                                   int window, int order);

struct AllanCurve {
  enum class Estimator { overlapping, non_overlapping };
  std::vector<double> taus_s;
  std::vector<double> sigmas;
  Estimator estimator = Estimator::overlapping;
};

// Allan deviation over the requested averaging times. Each tau is
// rounded to an integer number of sample periods; valid taus span
// [2/fs, duration/3].
AllanCurve allan_deviation(
    const TimeTrace& trace, const std::vector<double>& taus_s,
    AllanCurve::Estimator estimator = AllanCurve::Estimator::overlapping);

// Log-spaced tau grid, 20 points per decade, clipped to the valid range.
std::vector<double> default_tau_grid(const TimeTrace& trace);

// sigma * sqrt(tau): Allan deviation at one tau converted to a
// sensitivity via the sampling-bin bandwidth.
double extract_sensitivity(double sigma_t, double tau_s);

struct LogLogFit {
  double slope = 0;
  double std_error = 0;
  int n_points = 0;
};

// Least-squares line in log-log space over points with x inside
// [x_min, x_max]. All included values must be positive.
LogLogFit loglog_slope(const std::vector<double>& x,
                       const std::vector<double>& y, double x_min,
                       double x_max);

// Removes the least-squares line from a series.
std::vector<double> detrend_linear(const std::vector<double>& series);

// Envelope beat detection: squares the detrended trace and returns the
// ASD peak frequency inside [f_lo, f_hi].
double beat_frequency_hz(const TimeTrace& trace, double f_lo, double f_hi,
                         std::size_t segment_len);

struct LorentzianPeak {
  double center_mhz = 0;
  double hwhm_mhz = 0;
  double amplitude = 0;
};

struct LorentzianSumFit {
  std::vector<LorentzianPeak> peaks;
  double baseline = 0;
  double residual_norm = 0;
  std::vector<double> covariance_diag;
  int iterations = 0;
};

// Deterministic least-squares fit of baseline + sum of Lorentzians.
LorentzianSumFit fit_lorentzian_sum(const Spectrum& spectrum, int n_peaks,
                                    const std::vector<LorentzianPeak>& guess,
                                    double baseline_guess = 0.0);

}  // namespace nvmag
