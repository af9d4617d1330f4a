#include <cmath>

#include "bhd/detector_design.hpp"
#include "bhd/error.hpp"
#include "doctest.h"

using namespace bhd::design;

namespace {

// Independent re-derivation: shot / (thermal + dark) current noise, the
// bandwidth cancels.
double snr_oracle(double resp, double idark, double rsh) {
  const double q = 1.602176634e-19, k = 1.380649e-23;
  return 10.0 * std::log10(2 * q * 1e-3 * resp / (4 * k * 300.0 / rsh + 2 * q * idark));
}

}  // namespace

TEST_CASE("shot-noise-limited SNR of the catalog photodiodes") {
  const Environment env;
  CHECK(shot_noise_limited_snr(find_photodiode("LD50"), env) == doctest::Approx(82.1254).epsilon(2e-6));
  CHECK(shot_noise_limited_snr(find_photodiode("A75"), env) == doctest::Approx(76.7471).epsilon(2e-6));
  CHECK(shot_noise_limited_snr(find_photodiode("A40"), env) == doctest::Approx(75.9249).epsilon(2e-6));
  CHECK(shot_noise_limited_snr(find_photodiode("LD50"), env) == doctest::Approx(snr_oracle(0.90, 5e-12, 100e9)));
  CHECK(shot_noise_limited_snr(find_photodiode("A40"), env) == doctest::Approx(snr_oracle(0.85, 20e-12, 30e9)));
}

TEST_CASE("SNR scales as 10 dB per decade of optical power") {
  const auto& pd = find_photodiode("A75");
  const double a = shot_noise_limited_snr(pd, {300.0, 1e-3});
  const double b = shot_noise_limited_snr(pd, {300.0, 1e-2});
  CHECK(b - a == doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(shot_noise_limited_snr(pd, {300.0, 0.0}), bhd::DomainError);
  PhotodiodeSpec bad = pd;
  bad.shunt_resistance = 0;
  CHECK_THROWS_AS(shot_noise_limited_snr(bad, {}), bhd::DomainError);
}

TEST_CASE("cascade noise figure in both modes") {
  const auto& bgm = find_amplifier("BGM1013");
  const auto& bga = find_amplifier("BGA2817");
  const auto& aba = find_amplifier("ABA-52563");
  CHECK(cascade_noise_figure(bgm, bgm, Mode::paper_literal) == doctest::Approx(4.6 + 3.6 / 35.5).epsilon(1e-14));
  CHECK(cascade_noise_figure(bga, bga, Mode::paper_literal) == doctest::Approx(4.0193).epsilon(1e-5));
  CHECK(cascade_noise_figure(aba, aba, Mode::paper_literal) == doctest::Approx(3.4070).epsilon(1e-5));

  // Friis with linear factors.
  auto friis = [](double nf, double g) {
    const double f = std::pow(10, nf / 10), gl = std::pow(10, g / 10);
    return 10 * std::log10(f + (f - 1) / gl);
  };
  CHECK(cascade_noise_figure(bgm, bgm, Mode::standard) == doctest::Approx(friis(4.6, 35.5)).epsilon(1e-14));
  CHECK(cascade_noise_figure(bga, bga, Mode::standard) == doctest::Approx(3.9096).epsilon(1e-5));
  CHECK(cascade_noise_figure(aba, aba, Mode::standard) == doctest::Approx(3.3163).epsilon(1e-5));

  AmplifierStageSpec zero_gain = bgm;
  zero_gain.gain_db = 0;
  CHECK_THROWS_AS(cascade_noise_figure(zero_gain, bgm, Mode::paper_literal), bhd::DomainError);
  CHECK(cascade_noise_figure(zero_gain, bgm, Mode::standard) == doctest::Approx(friis(4.6, 0.0)));
}

TEST_CASE("detector output SNR") {
  CHECK(detector_output_snr(80.0, 3.0, Mode::standard) == 77.0);
  CHECK(detector_output_snr(80.0, 10.0, Mode::paper_literal) == doctest::Approx(8.0));
  CHECK(detector_output_snr(80.0, 0.0, Mode::paper_literal) == 80.0);
}

TEST_CASE("paper-literal detector chain") {
  const auto& ld50 = find_photodiode("LD50");
  const Environment env;
  CHECK(detector_chain(ld50, env, find_amplifier("BGM1013"), find_amplifier("BGM1013"), Mode::paper_literal).value_db ==
        doctest::Approx(27.83).epsilon(3e-4));
  CHECK(detector_chain(ld50, env, find_amplifier("BGA2817"), find_amplifier("BGA2817"), Mode::paper_literal).value_db ==
        doctest::Approx(32.55).epsilon(3e-4));
  const auto aba = detector_chain(ld50, env, find_amplifier("ABA-52563"), find_amplifier("ABA-52563"), Mode::paper_literal);
  CHECK(aba.value_db == doctest::Approx(82.13 / std::pow(10, 0.341)).epsilon(1e-12));
  CHECK(aba.inputs_echo.find("ABA-52563") != std::string::npos);
  const auto std_chain =
      detector_chain(ld50, env, find_amplifier("BGM1013"), find_amplifier("BGM1013"), Mode::standard);
  CHECK(std_chain.value_db == doctest::Approx(82.1254 - 4.6008).epsilon(2e-5));
}

TEST_CASE("round half even") {
  CHECK(round_half_even(37.445) == doctest::Approx(37.44));
  CHECK(round_half_even(37.455) == doctest::Approx(37.46));
  CHECK(round_half_even(82.1254) == doctest::Approx(82.13));
  CHECK(round_half_even(-1.005) == doctest::Approx(-1.00));
  CHECK(round_half_even(2.5, 0) == 2.0);
  CHECK(round_half_even(3.5, 0) == 4.0);
}

TEST_CASE("mode parsing and catalog lookups") {
  CHECK(parse_mode("paper-literal") == Mode::paper_literal);
  CHECK(parse_mode("paper_literal") == Mode::paper_literal);
  CHECK(parse_mode("standard") == Mode::standard);
  CHECK_THROWS_AS(parse_mode("friis"), bhd::DomainError);
  CHECK(to_string(Mode::paper_literal) == "paper-literal");
  CHECK_THROWS_AS(find_photodiode("G8195"), bhd::DomainError);
  CHECK(amplifier_catalog().size() == 3);
}

TEST_CASE("snr_from_powers") {
  CHECK(snr_from_powers(100.0, 1.0) == doctest::Approx(20.0));
  CHECK_THROWS_AS(snr_from_powers(0.0, 1.0), bhd::DomainError);
}
