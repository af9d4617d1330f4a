#include <cmath>
#include <complex>
#include <string>

#include "bhd/error.hpp"
#include "bhd/rf_network.hpp"
#include "doctest.h"

using namespace bhd::rf;

TEST_CASE("RI data in GHz") {
  const auto n = parse_touchstone("! comment\n# GHz S RI R 50\n1.0 0 0 0.5 0 0 0 0 0\n");
  REQUIRE(n.s.size() == 1);
  CHECK(n.sweep[0] == 1e9);
  CHECK(n.z_ref == 50.0);
  CHECK(n.s[0].s21 == Complex(0.5, 0.0));
  CHECK(n.s[0].s11 == Complex(0.0, 0.0));
}

TEST_CASE("MA data in MHz uses degrees") {
  const auto n = parse_touchstone("# MHz S MA R 75\n100 0 0 1 90 0 0 0 0\n");
  CHECK(n.sweep[0] == 100e6);
  CHECK(n.z_ref == 75.0);
  CHECK(std::abs(n.s[0].s21 - Complex(0.0, 1.0)) < 1e-15);
}

TEST_CASE("DB format and column order S11 S21 S12 S22") {
  const auto n = parse_touchstone("# Hz S DB R 50\n1e9 -20 0 -6.0206 0 -40 0 -10 180\n");
  CHECK(std::abs(n.s[0].s11) == doctest::Approx(0.1));
  CHECK(std::abs(n.s[0].s21) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(std::abs(n.s[0].s12) == doctest::Approx(0.01));
  CHECK(n.s[0].s22.real() == doctest::Approx(-std::pow(10.0, -0.5)));
}

TEST_CASE("defaults when the option line omits fields") {
  const auto n = parse_touchstone("#\n2 0.5 0 1 0 0 0 0.5 0\n");
  CHECK(n.sweep[0] == 2e9);
  CHECK(n.z_ref == 50.0);
}

TEST_CASE("noise parameter block is skipped") {
  const auto n = parse_touchstone(
      "# GHz S RI R 50\n1 0 0 1 0 0 0 0 0\n2 0 0 1 0 0 0 0 0\n! noise\n1 1.2 0.3 45 0.2\n2 1.4 0.3 50 0.2\n");
  CHECK(n.s.size() == 2);
}

TEST_CASE("malformed files carry line numbers") {
  try {
    parse_touchstone("1 0 0 1 0 0 0 0 0\n# GHz S RI R 50\n");
    FAIL("expected ParseError");
  } catch (const bhd::ParseError& e) {
    CHECK(e.line() == 1);
  }
  try {
    parse_touchstone("# GHz S RI R 50\n1 0 0 1 0 0 0 0 0\n1 0 0 1 0 0 0 0 0\n");
    FAIL("expected ParseError");
  } catch (const bhd::ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse_touchstone("# GHz S RI R 50\n1 0 0 1 0 0 0 0\n");
    FAIL("expected ParseError");
  } catch (const bhd::ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_touchstone(""), bhd::ParseError);
  CHECK_THROWS_AS(parse_touchstone("1 0 0 1 0 0 0 0 0\n"), bhd::ParseError);
  CHECK_THROWS_AS(parse_touchstone("[Version] 2.0\n# GHz S RI R 50\n"), bhd::ParseError);
  CHECK_THROWS_AS(parse_touchstone("# GHz Y RI R 50\n1 0 0 1 0 0 0 0 0\n"), bhd::ParseError);
  CHECK_THROWS_AS(parse_touchstone("# GHz S RI R 50\n1 0 0 x 0 0 0 0 0\n"), bhd::ParseError);
}

TEST_CASE("write then parse round-trips") {
  TwoPortNetwork n{FrequencySweep({1e8, 2.5e8, 3e9}), {}, 50.0};
  for (int i = 0; i < 3; ++i)
    n.s.push_back({Complex(0.1 * i, -0.2), Complex(0.7, 0.01 * i), Complex(0.7, 0.3), Complex(-0.05, 1e-7 * i)});
  const auto back = parse_touchstone(write_touchstone(n));
  CHECK(back.sweep == n.sweep);
  CHECK(back.z_ref == n.z_ref);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(back.s[i].s11 - n.s[i].s11) <= 1e-12);
    CHECK(std::abs(back.s[i].s12 - n.s[i].s12) <= 1e-12);
    CHECK(std::abs(back.s[i].s21 - n.s[i].s21) <= 1e-12);
    CHECK(std::abs(back.s[i].s22 - n.s[i].s22) <= 1e-12);
  }
}
