#include "bhd/quantization_entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bhd/error.hpp"
#include "bhd/special.hpp"

namespace bhd::entropy {

void AdcConfig::validate() const {
  if (bits < 1 || bits > 16) throw DomainError("AdcConfig: bits must lie in [1, 16]");
  if (!(half_range > 0) || !std::isfinite(half_range)) throw DomainError("AdcConfig: half_range must be > 0");
}

double AdcConfig::bin_width() const { return std::ldexp(2.0 * half_range, -static_cast<int>(bits)); }

std::uint16_t quantize_value(double v, const AdcConfig& adc) {
  const double top = static_cast<double>(adc.levels() - 1);
  if (std::isnan(v)) throw DomainError("quantize: NaN sample");
  const double k = std::floor((v + adc.half_range) / adc.bin_width());
  return static_cast<std::uint16_t>(std::clamp(k, 0.0, top));
}

QuantizedStream quantize(std::span<const double> samples, const AdcConfig& adc) {
  adc.validate();
  QuantizedStream q;
  q.bits = adc.bits;
  q.codes.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double v = samples[i];
    if (v < -adc.half_range) ++q.saturated_low;
    if (v >= adc.half_range) ++q.saturated_high;
    q.codes[i] = quantize_value(v, adc);
  }
  return q;
}

double empirical_min_entropy(std::span<const std::uint16_t> codes, unsigned bits) {
  if (codes.empty()) throw DomainError("empirical_min_entropy: empty input");
  if (bits < 1 || bits > 16) throw DomainError("empirical_min_entropy: bits must lie in [1, 16]");
  std::vector<std::size_t> hist(std::size_t{1} << bits, 0);
  for (auto c : codes) {
    if (c >= hist.size()) throw DomainError("empirical_min_entropy: code " + std::to_string(c) + " out of range");
    ++hist[c];
  }
  const auto max_count = *std::max_element(hist.begin(), hist.end());
  const double h = -std::log2(static_cast<double>(max_count) / static_cast<double>(codes.size()));
  return h == 0.0 ? 0.0 : h;  // no -0
}

void NoisePartition::validate() const {
  if (!(sigma_q > 0)) throw DomainError("NoisePartition: sigma_q must be > 0");
  if (!(sigma_e >= 0)) throw DomainError("NoisePartition: sigma_e must be >= 0");
  if (!(e_max >= 0)) throw DomainError("NoisePartition: e_max must be >= 0");
}

NoisePartition NoisePartition::from_classical(double sigma_q, double sigma_e, double k) {
  if (!(k >= 0)) throw DomainError("NoisePartition: excursion factor must be >= 0");
  NoisePartition np{sigma_q, sigma_e, k * sigma_e};
  np.validate();
  return np;
}

ConditionalEntropy conditional_min_entropy(const NoisePartition& np, const AdcConfig& adc) {
  np.validate();
  adc.validate();
  const double delta = adc.bin_width();
  const double z = (np.e_max - adc.half_range + 1.5 * delta) / (std::sqrt(2.0) * np.sigma_q);
  ConditionalEntropy out;
  // 0.5 * (erf(z) + 1), via erfc to keep precision deep in the lower tail.
  out.c1 = 0.5 * std::erfc(-z);
  out.c2 = std::erf(delta / (2.0 * std::sqrt(2.0) * np.sigma_q));
  out.safe = out.c1 <= out.c2;
  out.h = -std::log2(std::max(out.c1, out.c2));
  return out;
}

bool check_safety(const NoisePartition& np, const AdcConfig& adc) { return conditional_min_entropy(np, adc).safe; }

Qcnr qcnr(const NoisePartition& np) {
  np.validate();
  if (np.sigma_e == 0) return {std::numeric_limits<double>::infinity(), true};
  return {10.0 * std::log10((np.sigma_q * np.sigma_q) / (np.sigma_e * np.sigma_e)), false};
}

double sigma_ratio_for_entropy(double h_bits) {
  if (!(h_bits > 0)) throw DomainError("sigma_ratio_for_entropy: h must be > 0");
  // erf(1 / (2 sqrt2 r)) = 2^-h
  const double x = erf_inv(std::exp2(-h_bits));
  return 1.0 / (2.0 * std::sqrt(2.0) * x);
}

EntropyReport make_report(const QuantizedStream& q, const NoisePartition& np, const AdcConfig& adc) {
  if (q.bits != adc.bits) throw DomainError("make_report: stream bit depth does not match the ADC");
  const auto ce = conditional_min_entropy(np, adc);
  EntropyReport r;
  r.h_min_empirical = empirical_min_entropy(q.codes, q.bits);
  r.h_min_conditional_raw = ce.h;
  r.h_min_conditional = std::min(ce.h, static_cast<double>(adc.bits));
  r.c1 = ce.c1;
  r.c2 = ce.c2;
  r.safe = ce.safe;
  r.qcnr = qcnr(np);
  r.samples = q.codes.size();
  r.saturated_low = q.saturated_low;
  r.saturated_high = q.saturated_high;
  return r;
}

std::vector<std::uint8_t> pack_codes(std::span<const std::uint16_t> codes, unsigned bits) {
  if (bits < 1 || bits > 8) throw DomainError("pack_codes: one byte per code needs bits <= 8");
  std::vector<std::uint8_t> out(codes.size());
  const unsigned limit = 1U << bits;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] >= limit) throw DomainError("pack_codes: code out of range");
    out[i] = static_cast<std::uint8_t>(codes[i]);
  }
  return out;
}

}  // namespace bhd::entropy
