#include "nvmag/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "nvmag/errors.hpp"

namespace nvmag {

namespace {
// FFTW planning is not thread safe; execution of a ready plan is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::vector<std::complex<double>> rfft(const std::vector<double>& input) {
  if (input.empty()) throw ValidationError("rfft: empty input");
  const std::size_t n = input.size();
  std::vector<double> in(input);
  std::vector<std::complex<double>> out(n / 2 + 1);

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum,
                          std::size_t n) {
  if (spectrum.size() != n / 2 + 1) {
    throw ValidationError("irfft: spectrum length does not match n");
  }
  std::vector<std::complex<double>> in(spectrum);
  std::vector<double> out(n);

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                reinterpret_cast<fftw_complex*>(in.data()),
                                out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

}  // namespace nvmag
