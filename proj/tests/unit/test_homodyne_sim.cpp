#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>

#include "bhd/error.hpp"
#include "bhd/homodyne_sim.hpp"
#include "bhd/random.hpp"
#include "doctest.h"

using namespace bhd::homodyne;

namespace {

double variance(const std::vector<double>& x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

SpectrumEstimate synthetic(std::vector<double> db, double df = 1e6) {
  SpectrumEstimate s;
  s.resolution_bw = df;
  s.segments = 1;
  for (std::size_t k = 0; k < db.size(); ++k) s.frequencies.push_back(static_cast<double>(k) * df);
  s.psd_db = std::move(db);
  return s;
}

SampleStream white(std::size_t n, double sigma, double fs, std::uint64_t seed) {
  bhd::GaussianSource g(seed);
  SampleStream s{std::vector<double>(n), fs, 0.0};
  for (auto& v : s.samples) v = sigma * g();
  return s;
}

}  // namespace

TEST_CASE("model validation and response") {
  DetectorModel m;
  CHECK_NOTHROW(m.validate());
  CHECK(m.response_power(0) == 1.0);
  CHECK(m.response_power(m.f3db) == doctest::Approx(0.5));
  m.saturation_power = 0;
  CHECK_THROWS_AS(m.validate(), bhd::DomainError);
  m = DetectorModel{};
  m.ripple_db = 1.0;
  const double peak = m.ripple_band_lo + m.ripple_period / 4;
  const DetectorModel flat;
  CHECK(10 * std::log10(m.response_power(peak) / flat.response_power(peak)) == doctest::Approx(1.0));
  CHECK(m.response_power(m.ripple_band_lo - 1) == flat.response_power(m.ripple_band_lo - 1));
  CHECK(m.shot_psd(4e-3, 0) == m.shot_psd(2e-3, 0));
}

TEST_CASE("dark stream carries only electronic noise") {
  DetectorModel m;
  const std::size_t n = 1'000'000;
  const auto s = generate_vacuum_stream(m, 0.0, n);
  const double expect = m.elec_noise_psd * m.sample_rate / 2;
  CHECK(std::fabs(variance(s.samples) - expect) < 3 * expect * std::sqrt(2.0 / n));
  CHECK_THROWS_AS(generate_vacuum_stream(m, -1e-3, 10), bhd::DomainError);
  CHECK_THROWS_AS(generate_vacuum_stream(m, 1e-3, 0), bhd::DomainError);
}

TEST_CASE("shot noise variance matches the shaped PSD integral") {
  DetectorModel m;
  m.elec_noise_psd = 0;
  const auto s = generate_vacuum_stream(m, 1e-3, 1 << 20);
  // Integral of psd0 / (1 + (f/f3)^2) from 0 to fs/2.
  const double expect = m.shot_noise_psd_per_mw * m.f3db * std::atan(m.sample_rate / 2 / m.f3db);
  CHECK(variance(s.samples) == doctest::Approx(expect).epsilon(0.01));
}

TEST_CASE("power doubling adds 3 dB and saturation clamps") {
  DetectorModel m;
  const std::size_t n = 1'000'000;
  auto band = [&](double p) {
    return band_mean_psd_db(estimate_spectrum(generate_vacuum_stream(m, p, n), 4096), 0.1e9, 1.5e9);
  };
  CHECK(std::fabs(band(1e-3) - band(0.5e-3) - 3.0103) < 0.1);
  CHECK(std::fabs(band(4e-3) - band(2e-3)) < 0.1);
}

TEST_CASE("streams are reproducible and fresh per call argument") {
  DetectorModel m;
  const auto a = generate_vacuum_stream(m, 1e-3, 5000);
  const auto b = generate_vacuum_stream(m, 1e-3, 5000);
  CHECK(a.samples == b.samples);
  CHECK(generate_vacuum_stream(m, 1.1e-3, 5000).samples != a.samples);
  m.rng_seed = 2;
  CHECK(generate_vacuum_stream(m, 1e-3, 5000).samples != a.samples);
}

TEST_CASE("shot and electronic components are uncorrelated") {
  DetectorModel m;
  const std::size_t n = 1'000'000;
  const auto c = generate_vacuum_components(m, 1e-3, n);
  double sxy = 0;
  for (std::size_t i = 0; i < n; ++i) sxy += c.shot.samples[i] * c.electronic.samples[i];
  const double rho = sxy / std::sqrt(variance(c.shot.samples) * variance(c.electronic.samples)) / n;
  CHECK(std::fabs(rho) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("flicker term raises low-frequency electronic noise") {
  DetectorModel m;
  m.flicker_corner = 500e6;
  const auto s = estimate_spectrum(generate_vacuum_stream(m, 0.0, 1 << 20), 4096);
  CHECK(band_mean_psd_db(s, 40e6, 60e6) - band_mean_psd_db(s, 2e9, 2.4e9) > 8.0);
}

TEST_CASE("spectrum estimator: white noise level and Parseval") {
  const double fs = 1e9, sigma = 0.3;
  const auto s = white(1'000'000, sigma, fs, 17);
  const auto est = estimate_spectrum(s, 1024);
  CHECK(est.frequencies.front() == 0.0);
  CHECK(est.frequencies.back() == fs / 2);
  const double level = std::pow(10.0, band_mean_psd_db(est, 0, fs / 2) / 10);
  CHECK(level == doctest::Approx(sigma * sigma / (fs / 2)).epsilon(0.03));
  double total = 0;
  for (double db : est.psd_db) total += std::pow(10.0, db / 10) * est.resolution_bw;
  CHECK(total == doctest::Approx(variance(s.samples)).epsilon(0.01));
}

TEST_CASE("spectrum estimator: sine and DC") {
  const double fs = 1e9, a = 0.7;
  const std::size_t seg = 1024;
  const double f0 = 100 * fs / seg;
  SampleStream s{std::vector<double>(1 << 16), fs, 0};
  for (std::size_t i = 0; i < s.samples.size(); ++i) s.samples[i] = a * std::sin(2 * std::numbers::pi * f0 * i / fs);
  const auto est = estimate_spectrum(s, seg);
  const auto peak = std::max_element(est.psd_db.begin(), est.psd_db.end()) - est.psd_db.begin();
  CHECK(peak == 100);
  double p = 0;
  for (int k = 97; k <= 103; ++k) p += std::pow(10.0, est.psd_db[k] / 10) * est.resolution_bw;
  CHECK(p == doctest::Approx(a * a / 2).epsilon(0.02));

  SampleStream dc{std::vector<double>(4096, 0.25), fs, 0};
  const auto d = estimate_spectrum(dc, 256);
  CHECK(std::pow(10.0, d.psd_db[0] / 10) * d.resolution_bw == doctest::Approx(0.0625));
  for (std::size_t k = 1; k < d.psd_db.size(); ++k) CHECK(d.psd_db[k] < d.psd_db[0] - 200);

  CHECK_THROWS_AS(estimate_spectrum(dc, 8192), bhd::DomainError);
  CHECK_THROWS_AS(estimate_spectrum(dc, 300), bhd::DomainError);
}

TEST_CASE("snr, flatness and bandwidth on synthetic spectra") {
  std::vector<double> base(200, -100.0);
  const auto a = synthetic(base);
  std::vector<double> up = base;
  for (auto& v : up) v += 20;
  const auto b = synthetic(up);
  CHECK(measure_snr_spectrum(a, a, 50e6) == 0.0);
  CHECK(measure_snr_spectrum(b, a, 50e6) == doctest::Approx(20.0));
  CHECK_THROWS_AS(measure_snr_spectrum(b, a, 500e6), bhd::DomainError);

  CHECK(measure_band_flatness(a, 10e6, 100e6) == 0.0);
  // 0.03 dB per 1 MHz bin: 3 dB across 50..150 MHz, and the -3 dB point
  // from DC at 100 MHz.
  std::vector<double> slope(200);
  for (std::size_t k = 0; k < 200; ++k) slope[k] = -100.0 - 0.03 * static_cast<double>(k);
  CHECK(measure_band_flatness(synthetic(slope), 50e6, 150e6) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK_THROWS_AS(measure_band_flatness(a, 10.2e6, 10.4e6), bhd::DomainError);

  CHECK_FALSE(measure_bandwidth(a, 10e6).has_value());
  const auto bw = measure_bandwidth(synthetic(slope), 10e6);
  REQUIRE(bw.has_value());
  CHECK(*bw == doctest::Approx(110e6).epsilon(1e-6));
}

TEST_CASE("recovered shot-to-electronic ratio") {
  DetectorModel m;
  set_shot_to_elec_ratio(m, 1e-3, 1.75e9, 41.5);
  const std::size_t n = 1'000'000;
  const auto lit = estimate_spectrum(generate_vacuum_stream(m, 1e-3, n), 1024);
  const auto dark = estimate_spectrum(generate_vacuum_stream(m, 0.0, n), 1024);
  CHECK(measure_snr_spectrum(lit, dark, 1.75e9) == doctest::Approx(41.5).epsilon(0.3 / 41.5));
}

TEST_CASE("bandwidth recovery") {
  for (double f3 : {1.9e9, 0.95e9}) {
    DetectorModel m;
    m.f3db = f3;
    const auto est = estimate_spectrum(generate_vacuum_stream(m, 1e-3, 2'000'000), 512);
    const auto bw = measure_bandwidth(est, 10 * est.resolution_bw);
    REQUIRE(bw.has_value());
    CHECK(*bw == doctest::Approx(f3).epsilon(0.02));
  }
}

TEST_CASE("ripple flatness") {
  DetectorModel m;
  m.f3db = 1e15;
  m.ripple_db = 1.35;
  const auto est = estimate_spectrum(generate_vacuum_stream(m, 1e-3, 4'000'000), 2048);
  CHECK(measure_band_flatness(est, 1.3e9, 1.7e9) == doctest::Approx(1.35).epsilon(0.05 / 1.35));
}

TEST_CASE("common-mode rejection") {
  DetectorModel m;
  const std::size_t n = 1 << 20, seg = 4096;
  const double tone = 100e6;

  auto cmrr_for = [&](double g) {
    m.pd_gain_ratio = g;
    const auto p = generate_cm_tone_streams(m, 1e-3, tone, 0.1, n);
    return measure_cmrr(estimate_spectrum(p.single_pd, seg), estimate_spectrum(p.balanced, seg), tone);
  };
  CHECK(cmrr_for(0.9) == doctest::Approx(20.0).epsilon(0.5 / 20));
  CHECK(cmrr_for(1.0 - std::pow(10.0, -1.5)) == doctest::Approx(30.0).epsilon(0.5 / 30));

  m.pd_gain_ratio = 1.0;
  const auto p = generate_cm_tone_streams(m, 1e-3, tone, 0.1, n);
  const auto single = estimate_spectrum(p.single_pd, seg);
  CHECK(tone_zscore(estimate_spectrum(p.balanced, seg), tone) < 3.0);
  CHECK(measure_cmrr(single, single, tone) == 0.0);

  m.cm_volts_per_mw = 1e-9;
  const auto faint = generate_cm_tone_streams(m, 1e-3, tone, 0.1, n);
  const auto fs = estimate_spectrum(faint.single_pd, seg);
  CHECK_THROWS_AS(measure_cmrr(fs, fs, tone), bhd::MeasurementError);

  CHECK_THROWS_AS(generate_cm_tone_streams(m, 1e-3, m.sample_rate / 2, 0.1, 100), bhd::DomainError);
  CHECK_THROWS_AS(generate_cm_tone_streams(m, 1e-3, tone, 1.0, 100), bhd::DomainError);
}

TEST_CASE("float32 stream files round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "bhd_stream_test";
  std::filesystem::create_directories(dir);
  SampleStream s{{0.5, -1.25, 3.0e-6}, 5e9, 1e-3};
  write_stream_f32(dir / "s.f32", s, 9);
  const auto r = read_stream_f32(dir / "s.f32");
  CHECK(r.sample_rate == 5e9);
  CHECK(r.lo_power == 1e-3);
  REQUIRE(r.samples.size() == 3);
  CHECK(r.samples[1] == -1.25);
  CHECK(r.samples[2] == doctest::Approx(3.0e-6));
  CHECK(std::filesystem::file_size(dir / "s.f32") == 12);
  std::filesystem::remove_all(dir);
}

TEST_CASE("spectrum csv") {
  CHECK(spectrum_csv(synthetic({-1.0, -2.0})) == "frequency_hz,psd_db\n0,-1\n1000000,-2\n");
}
