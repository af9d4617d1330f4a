#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "bhd/error.hpp"

namespace bhd::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw DomainError("RealFft: length must be at least 2");
  real_ = fftw_alloc_real(n);
  spec_ = fftw_alloc_complex(n / 2 + 1);
  if (!real_ || !spec_) {
    fftw_free(real_);
    fftw_free(spec_);
    throw Error("RealFft: allocation failed");
  }
  std::lock_guard lock(planner_mutex());
  const int len = static_cast<int>(n);
  auto* spec = static_cast<fftw_complex*>(spec_);
  forward_plan_ = fftw_plan_dft_r2c_1d(len, real_, spec, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(len, spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  }
  fftw_free(real_);
  fftw_free(spec_);
}

std::span<double> RealFft::real() noexcept { return {real_, n_}; }

std::span<std::complex<double>> RealFft::spectrum() noexcept {
  // fftw_complex is layout-compatible with std::complex<double>.
  return {reinterpret_cast<std::complex<double>*>(spec_), n_ / 2 + 1};
}

void RealFft::forward() { fftw_execute(static_cast<fftw_plan>(forward_plan_)); }
void RealFft::inverse() { fftw_execute(static_cast<fftw_plan>(inverse_plan_)); }

}  // namespace bhd::detail
