#pragma once

#include <complex>
#include <vector>

namespace nvmag {

// Real-input FFT, n/2+1 output bins (unnormalized, FFTW convention).
std::vector<std::complex<double>> rfft(const std::vector<double>& input);

// Inverse of rfft; `n` is the real output length. Normalized by 1/n.
std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum,
                          std::size_t n);

}  // namespace nvmag
