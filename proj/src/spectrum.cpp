#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "bhd/error.hpp"
#include "bhd/homodyne_sim.hpp"
#include "fft.hpp"

namespace bhd::homodyne {

namespace {

constexpr double kFloorPsd = 1e-300;

double to_db(double v) { return 10.0 * std::log10(std::max(v, kFloorPsd)); }
double from_db(double v) { return std::pow(10.0, v / 10.0); }

std::size_t nearest_bin(const SpectrumEstimate& s, double f) {
  if (s.frequencies.empty()) throw DomainError("empty spectrum");
  if (f < s.frequencies.front() || f > s.frequencies.back())
    throw DomainError("frequency " + std::to_string(f) + " Hz outside the spectrum grid");
  const auto k = static_cast<std::size_t>(std::llround(f / s.resolution_bw));
  return std::min(k, s.frequencies.size() - 1);
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

SpectrumEstimate estimate_spectrum(const SampleStream& s, std::size_t segment_len) {
  const std::size_t n = s.samples.size();
  if (n == 0) throw DomainError("estimate_spectrum: empty stream");
  if (!(s.sample_rate > 0)) throw DomainError("estimate_spectrum: sample_rate must be > 0");
  if (segment_len < 2 || !std::has_single_bit(segment_len))
    throw DomainError("estimate_spectrum: segment length must be a power of two >= 2");
  if (segment_len > n) throw DomainError("estimate_spectrum: segment longer than the stream");

  const std::size_t step = segment_len / 2;
  const std::size_t segments = (n - segment_len) / step + 1;
  const double fs = s.sample_rate;

  std::vector<double> window(segment_len);
  for (std::size_t i = 0; i < segment_len; ++i)
    window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(segment_len)));
  const double window_power = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);

  detail::RealFft fft(segment_len);
  std::vector<double> acc(fft.bins(), 0.0);
  double dc_power = 0;
  for (std::size_t seg = 0; seg < segments; ++seg) {
    const double* x = s.samples.data() + seg * step;
    const double mean = std::accumulate(x, x + segment_len, 0.0) / static_cast<double>(segment_len);
    dc_power += mean * mean;
    auto buf = fft.real();
    for (std::size_t i = 0; i < segment_len; ++i) buf[i] = (x[i] - mean) * window[i];
    fft.forward();
    const auto spec = fft.spectrum();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += std::norm(spec[k]);
  }

  SpectrumEstimate out;
  out.segments = segments;
  out.resolution_bw = fs / static_cast<double>(segment_len);
  out.frequencies.resize(acc.size());
  out.psd_db.resize(acc.size());
  const double scale = 1.0 / (static_cast<double>(segments) * fs * window_power);
  for (std::size_t k = 0; k < acc.size(); ++k) {
    double p = acc[k] * scale;
    if (k != 0 && k != acc.size() - 1) p *= 2.0;
    if (k == 0) p += dc_power / static_cast<double>(segments) / out.resolution_bw;
    out.frequencies[k] = static_cast<double>(k) * out.resolution_bw;
    out.psd_db[k] = to_db(p);
  }
  return out;
}

std::vector<double> smoothed_psd_db(const SpectrumEstimate& s) {
  const std::size_t n = s.psd_db.size();
  std::vector<double> out(n);
  std::vector<double> win;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k >= 2 ? k - 2 : 0;
    const std::size_t hi = std::min(n - 1, k + 2);
    win.assign(s.psd_db.begin() + static_cast<std::ptrdiff_t>(lo), s.psd_db.begin() + static_cast<std::ptrdiff_t>(hi + 1));
    out[k] = median(win);
  }
  return out;
}

double measure_snr_spectrum(const SpectrumEstimate& sig, const SpectrumEstimate& noise, double f) {
  if (sig.frequencies != noise.frequencies) throw DomainError("measure_snr_spectrum: spectra use different grids");
  const std::size_t k = nearest_bin(sig, f);
  return smoothed_psd_db(sig)[k] - smoothed_psd_db(noise)[k];
}

double measure_band_flatness(const SpectrumEstimate& s, double lo, double hi) {
  if (!(lo <= hi)) throw DomainError("measure_band_flatness: band must satisfy lo <= hi");
  if (s.frequencies.empty() || lo < s.frequencies.front() || hi > s.frequencies.back())
    throw DomainError("measure_band_flatness: band outside the spectrum grid");
  const auto smooth = smoothed_psd_db(s);
  double mn = INFINITY, mx = -INFINITY;
  std::size_t count = 0;
  for (std::size_t k = 0; k < smooth.size(); ++k) {
    if (s.frequencies[k] < lo || s.frequencies[k] > hi) continue;
    mn = std::min(mn, smooth[k]);
    mx = std::max(mx, smooth[k]);
    ++count;
  }
  if (count == 0) throw DomainError("measure_band_flatness: no bins inside the band");
  return (mx - mn) / 2.0;
}

std::optional<double> measure_bandwidth(const SpectrumEstimate& s, double ref_freq) {
  const std::size_t k_ref = nearest_bin(s, ref_freq);
  const auto smooth = smoothed_psd_db(s);
  const double target = smooth[k_ref] - 3.0;
  for (std::size_t k = k_ref + 1; k < smooth.size(); ++k) {
    if (smooth[k] < target) {
      const double a = smooth[k - 1];
      const double b = smooth[k];
      const double t = a > b ? (a - target) / (a - b) : 1.0;
      return s.frequencies[k - 1] + t * s.resolution_bw;
    }
  }
  return std::nullopt;
}

namespace {

struct LocalFloor {
  double mean = 0;
  double stddev = 0;
  double median = 0;
};

// Noise floor from bins 8..40 away from k0 on both sides.
LocalFloor local_floor(const SpectrumEstimate& s, std::size_t k0) {
  std::vector<double> v;
  const std::size_t n = s.psd_db.size();
  for (std::size_t d = 8; d <= 40; ++d) {
    if (k0 >= d) v.push_back(from_db(s.psd_db[k0 - d]));
    if (k0 + d < n) v.push_back(from_db(s.psd_db[k0 + d]));
  }
  if (v.size() < 8) throw MeasurementError("not enough bins around the tone to estimate the noise floor");
  LocalFloor f;
  f.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - f.mean) * (x - f.mean);
  f.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  f.median = median(v);
  return f;
}

double tone_power(const SpectrumEstimate& s, double tone_freq, bool require_resolvable) {
  const std::size_t k0 = nearest_bin(s, tone_freq);
  const LocalFloor fl = local_floor(s, k0);
  const std::size_t lo = k0 >= 3 ? k0 - 3 : 0;
  const std::size_t hi = std::min(s.psd_db.size() - 1, k0 + 3);
  double peak = 0, power = 0;
  for (std::size_t k = lo; k <= hi; ++k) {
    const double p = from_db(s.psd_db[k]);
    peak = std::max(peak, p);
    power += (p - fl.median) * s.resolution_bw;
  }
  if (require_resolvable && peak < 10.0 * fl.median)
    throw MeasurementError("tone at " + std::to_string(tone_freq) + " Hz is not resolvable (< 10 dB above floor)");
  if (!(power > 0)) throw MeasurementError("tone at " + std::to_string(tone_freq) + " Hz is below the noise floor");
  return power;
}

}  // namespace

double measure_cmrr(const SpectrumEstimate& single_pd, const SpectrumEstimate& balanced, double tone_freq) {
  if (single_pd.frequencies != balanced.frequencies) throw DomainError("measure_cmrr: spectra use different grids");
  const double p_single = tone_power(single_pd, tone_freq, true);
  const double p_bal = tone_power(balanced, tone_freq, false);
  return 10.0 * std::log10(p_single / p_bal);
}

double band_mean_psd_db(const SpectrumEstimate& s, double lo, double hi) {
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < s.frequencies.size(); ++k) {
    if (s.frequencies[k] < lo || s.frequencies[k] > hi) continue;
    sum += from_db(s.psd_db[k]);
    ++count;
  }
  if (count == 0) throw DomainError("band_mean_psd_db: no bins inside the band");
  return to_db(sum / static_cast<double>(count));
}

double tone_zscore(const SpectrumEstimate& s, double tone_freq) {
  const std::size_t k0 = nearest_bin(s, tone_freq);
  const LocalFloor fl = local_floor(s, k0);
  if (fl.stddev == 0) return 0;
  return (from_db(s.psd_db[k0]) - fl.mean) / fl.stddev;
}

std::string spectrum_csv(const SpectrumEstimate& s) {
  std::ostringstream os;
  os.precision(12);
  os << "frequency_hz,psd_db\n";
  for (std::size_t k = 0; k < s.frequencies.size(); ++k) os << s.frequencies[k] << ',' << s.psd_db[k] << '\n';
  return os.str();
}

}  // namespace bhd::homodyne
