#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace bhd::detail {

/// Real-to-complex and complex-to-real FFT of a fixed length, backed by
/// FFTW. Unnormalized in both directions. Not shareable across threads;
/// plan creation is serialized internally.
class RealFft {
public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  /// Real input buffer (size n) and complex spectrum buffer (size n/2 + 1).
  std::span<double> real() noexcept;
  std::span<std::complex<double>> spectrum() noexcept;

  void forward();  // real -> spectrum
  void inverse();  // spectrum -> real

private:
  std::size_t n_;
  double* real_ = nullptr;
  void* spec_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace bhd::detail
