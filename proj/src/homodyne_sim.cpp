#include "bhd/homodyne_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

#include <json.hpp>

#include "bhd/error.hpp"
#include "bhd/random.hpp"
#include "fft.hpp"

namespace bhd::homodyne {

void DetectorModel::validate() const {
  if (!(sample_rate > 0)) throw DomainError("DetectorModel: sample_rate must be > 0");
  if (!(f3db > 0)) throw DomainError("DetectorModel: f3db must be > 0");
  if (!(saturation_power > 0)) throw DomainError("DetectorModel: saturation_power must be > 0");
  if (!(pd_gain_ratio > 0)) throw DomainError("DetectorModel: pd_gain_ratio must be > 0");
  if (!(shot_noise_psd_per_mw >= 0)) throw DomainError("DetectorModel: shot_noise_psd_per_mw must be >= 0");
  if (!(elec_noise_psd >= 0)) throw DomainError("DetectorModel: elec_noise_psd must be >= 0");
  if (!(ripple_db >= 0)) throw DomainError("DetectorModel: ripple_db must be >= 0");
  if (ripple_db > 0 && !(ripple_period > 0 && ripple_band_lo < ripple_band_hi))
    throw DomainError("DetectorModel: ripple needs a positive period and a non-empty band");
  if (!(flicker_corner >= 0)) throw DomainError("DetectorModel: flicker_corner must be >= 0");
  if (!(cm_volts_per_mw >= 0)) throw DomainError("DetectorModel: cm_volts_per_mw must be >= 0");
}

double DetectorModel::response_power(double f) const {
  const double x = f / f3db;
  double h = 1.0 / (1.0 + x * x);
  if (ripple_db > 0 && f >= ripple_band_lo && f <= ripple_band_hi) {
    const double dev = ripple_db * std::sin(2.0 * std::numbers::pi * (f - ripple_band_lo) / ripple_period);
    h *= std::pow(10.0, dev / 10.0);
  }
  return h;
}

double DetectorModel::shot_psd(double lo_power, double f) const {
  const double effective_mw = std::min(lo_power, saturation_power) * 1e3;
  return shot_noise_psd_per_mw * effective_mw * response_power(f);
}

double DetectorModel::elec_psd(double f) const {
  if (flicker_corner > 0) return elec_noise_psd * (1.0 + flicker_corner / f);
  return elec_noise_psd;
}

void set_shot_to_elec_ratio(DetectorModel& m, double lo_power, double f, double snr_db) {
  if (!(lo_power > 0)) throw DomainError("set_shot_to_elec_ratio: lo_power must be > 0");
  const double effective_mw = std::min(lo_power, m.saturation_power) * 1e3;
  m.shot_noise_psd_per_mw = m.elec_psd(f) * std::pow(10.0, snr_db / 10.0) / (effective_mw * m.response_power(f));
}

namespace {

constexpr std::size_t kMaxBlock = std::size_t{1} << 22;
constexpr std::uint64_t kShotTag = 0x53484f54;  // "SHOT"
constexpr std::uint64_t kElecTag = 0x454c4543;  // "ELEC"

// Gaussian noise with one-sided PSD psd(f), synthesized block-wise: white
// unit-variance samples are transformed, scaled bin-by-bin by
// sqrt(psd * fs / 2) and transformed back.
template <typename Psd>
std::vector<double> shaped_noise(std::size_t n, double fs, std::uint64_t key, Psd psd) {
  std::vector<double> out;
  out.reserve(n);
  const std::size_t nblocks = (n + kMaxBlock - 1) / kMaxBlock;
  for (std::size_t b = 0; b < nblocks; ++b) {
    const std::size_t want = n / nblocks + (b < n % nblocks ? 1 : 0);
    const std::size_t len = std::max<std::size_t>(want, 2);
    GaussianSource gauss(derive_key(key, b));
    detail::RealFft fft(len);
    auto x = fft.real();
    for (auto& v : x) v = gauss();
    fft.forward();
    auto spec = fft.spectrum();
    const double df = fs / static_cast<double>(len);
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double f = k == 0 ? df : static_cast<double>(k) * df;
      spec[k] *= std::sqrt(psd(f) * fs / 2.0);
    }
    fft.inverse();
    const double norm = 1.0 / static_cast<double>(len);
    for (std::size_t i = 0; i < want; ++i) out.push_back(x[i] * norm);
  }
  return out;
}

std::uint64_t stream_key(const DetectorModel& m, std::uint64_t tag, double lo_power) {
  return derive_key(m.rng_seed, tag, std::bit_cast<std::uint64_t>(lo_power));
}

}  // namespace

StreamComponents generate_vacuum_components(const DetectorModel& m, double lo_power, std::size_t n_samples) {
  m.validate();
  if (!(lo_power >= 0)) throw DomainError("generate_vacuum_stream: lo_power must be >= 0");
  if (n_samples == 0) throw DomainError("generate_vacuum_stream: n_samples must be > 0");
  const double fs = m.sample_rate;

  StreamComponents c;
  c.shot = {shaped_noise(n_samples, fs, stream_key(m, kShotTag, lo_power),
                         [&](double f) { return m.shot_psd(lo_power, f); }),
            fs, lo_power};
  if (m.flicker_corner > 0) {
    c.electronic = {shaped_noise(n_samples, fs, stream_key(m, kElecTag, lo_power),
                                 [&](double f) { return m.elec_psd(f); }),
                    fs, lo_power};
  } else {
    GaussianSource gauss(stream_key(m, kElecTag, lo_power));
    const double sigma = std::sqrt(m.elec_noise_psd * fs / 2.0);
    c.electronic = {std::vector<double>(n_samples), fs, lo_power};
    for (auto& v : c.electronic.samples) v = sigma * gauss();
  }
  return c;
}

SampleStream generate_vacuum_stream(const DetectorModel& m, double lo_power, std::size_t n_samples) {
  StreamComponents c = generate_vacuum_components(m, lo_power, n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) c.shot.samples[i] += c.electronic.samples[i];
  return std::move(c.shot);
}

TonePair generate_cm_tone_streams(const DetectorModel& m, double lo_power, double tone_freq, double tone_depth,
                                  std::size_t n_samples) {
  m.validate();
  if (!(tone_freq > 0 && tone_freq < m.sample_rate / 2))
    throw DomainError("generate_cm_tone_streams: tone frequency must lie in (0, sample_rate/2)");
  if (!(tone_depth > 0 && tone_depth < 1)) throw DomainError("generate_cm_tone_streams: tone_depth must lie in (0, 1)");

  TonePair pair;
  pair.single_pd = generate_vacuum_stream(m, lo_power, n_samples);
  pair.balanced = pair.single_pd;
  const double amplitude = tone_depth * m.cm_volts_per_mw * std::min(lo_power, m.saturation_power) * 1e3;
  const double residual = amplitude * std::fabs(1.0 - m.pd_gain_ratio);
  const double w = 2.0 * std::numbers::pi * tone_freq / m.sample_rate;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double s = std::sin(w * static_cast<double>(i));
    pair.single_pd.samples[i] += amplitude * s;
    pair.balanced.samples[i] += residual * s;
  }
  return pair;
}

void write_stream_f32(const std::filesystem::path& path, const SampleStream& s, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  std::vector<char> buf;
  buf.reserve(s.samples.size() * 4);
  for (double v : s.samples) {
    const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("write failed: " + path.string());

  nlohmann::json side = {{"format", "float32-le"},
                         {"samples", s.samples.size()},
                         {"sample_rate", s.sample_rate},
                         {"lo_power", s.lo_power},
                         {"seed", seed}};
  std::ofstream meta(path.string() + ".json");
  meta << side.dump(2) << '\n';
}

SampleStream read_stream_f32(const std::filesystem::path& path) {
  std::ifstream meta(path.string() + ".json");
  if (!meta) throw Error("missing sidecar " + path.string() + ".json");
  const auto side = nlohmann::json::parse(meta);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() % 4 != 0) throw ParseError("float32 stream length is not a multiple of 4 bytes", 0);
  SampleStream s;
  s.sample_rate = side.at("sample_rate").get<double>();
  s.lo_power = side.at("lo_power").get<double>();
  s.samples.resize(raw.size() / 4);
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(raw[4 * i + b]) << (8 * b);
    s.samples[i] = std::bit_cast<float>(u);
  }
  return s;
}

}  // namespace bhd::homodyne
