#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bhd::entropy {

/// n-bit ADC spanning [-R, +R).
struct AdcConfig {
  unsigned bits = 8;
  double half_range = 1.0;

  void validate() const;
  /// delta = 2R / 2^n.
  double bin_width() const;
  std::uint32_t levels() const { return std::uint32_t{1} << bits; }
};

struct QuantizedStream {
  std::vector<std::uint16_t> codes;
  unsigned bits = 0;
  std::size_t saturated_low = 0;   // v < -R
  std::size_t saturated_high = 0;  // v >= +R
};

/// Bin k covers [-R + k delta, -R + (k+1) delta); out-of-range values
/// saturate to the end bins.
std::uint16_t quantize_value(double v, const AdcConfig& adc);
QuantizedStream quantize(std::span<const double> samples, const AdcConfig& adc);

/// -log2 of the most frequent code's empirical frequency.
double empirical_min_entropy(std::span<const std::uint16_t> codes, unsigned bits);

struct NoisePartition {
  double sigma_q = 0;  // quantum noise std
  double sigma_e = 0;  // classical noise std
  double e_max = 0;    // worst-case classical excursion

  void validate() const;
  /// e_max = k * sigma_e.
  static NoisePartition from_classical(double sigma_q, double sigma_e, double k = 5.0);
};

struct ConditionalEntropy {
  double h = 0;
  double c1 = 0;  // probability of the saturated end bin
  double c2 = 0;  // probability of the central bin
  bool safe = false;
};

/// h = -log2 max(c1, c2). Not capped at adc.bits: a wide Gaussian on a
/// fine grid keeps gaining entropy in this bound.
ConditionalEntropy conditional_min_entropy(const NoisePartition& np, const AdcConfig& adc);

/// c1 <= c2 (inclusive).
bool check_safety(const NoisePartition& np, const AdcConfig& adc);

struct Qcnr {
  double db = 0;
  bool infinite = false;  // sigma_e == 0
};
Qcnr qcnr(const NoisePartition& np);

/// sigma_Q / delta at which the central-bin bound gives exactly `h_bits`.
double sigma_ratio_for_entropy(double h_bits);

struct EntropyReport {
  double h_min_empirical = 0;
  double h_min_conditional = 0;  // capped at adc.bits
  double h_min_conditional_raw = 0;
  double c1 = 0;
  double c2 = 0;
  bool safe = false;
  Qcnr qcnr;
  std::size_t samples = 0;
  std::size_t saturated_low = 0;
  std::size_t saturated_high = 0;
};

EntropyReport make_report(const QuantizedStream& q, const NoisePartition& np, const AdcConfig& adc);

/// One byte per code; bits must be <= 8.
std::vector<std::uint8_t> pack_codes(std::span<const std::uint16_t> codes, unsigned bits);

}  // namespace bhd::entropy
