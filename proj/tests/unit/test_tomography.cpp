#include <cmath>
#include <numbers>

#include "bhd/error.hpp"
#include "bhd/tomography.hpp"
#include "doctest.h"

using namespace bhd::tomo;

namespace {

const double kInvPi = 1.0 / std::numbers::pi;

std::vector<QuadratureStream> calibration_streams(const HeterodyneModel& m, std::size_t n) {
  std::vector<QuadratureStream> s;
  for (double p : calibration_powers()) s.push_back(generate_heterodyne_stream(m, p, n));
  return s;
}

HeterodyneModel shot_only(std::uint64_t seed = 1) {
  HeterodyneModel m;
  m.intercept_p = m.intercept_q = 0;
  m.rng_seed = seed;
  return m;
}

}  // namespace

TEST_CASE("heterodyne stream statistics") {
  HeterodyneModel m;
  const std::size_t n = 1'000'000;
  const auto dark = generate_heterodyne_stream(m, 0.0, n);
  CHECK(std::fabs(sample_variance(dark.p) - m.intercept_p) < 3 * m.intercept_p * std::sqrt(2.0 / n));

  const auto a = generate_heterodyne_stream(m, 0.4e-3, n);
  const auto b = generate_heterodyne_stream(m, 0.8e-3, n);
  const double expect = (0.8e-3 * m.slope_p + m.intercept_p) / (0.4e-3 * m.slope_p + m.intercept_p);
  CHECK(sample_variance(b.p) / sample_variance(a.p) == doctest::Approx(expect).epsilon(0.01));

  double spq = 0;
  for (std::size_t i = 0; i < n; ++i) spq += a.p[i] * a.q[i];
  const double rho = spq / n / std::sqrt(sample_variance(a.p) * sample_variance(a.q));
  CHECK(std::fabs(rho) < 3 / std::sqrt(static_cast<double>(n)));

  CHECK(generate_heterodyne_stream(m, 1e-3, 100).p == generate_heterodyne_stream(m, 1e-3, 100).p);
  CHECK_THROWS_AS(generate_heterodyne_stream(m, -1e-3, 10), bhd::DomainError);
  CHECK_THROWS_AS(generate_heterodyne_stream(m, 1e-3, 0), bhd::DomainError);
}

TEST_CASE("calibration on exact data") {
  const auto powers = calibration_powers();
  REQUIRE(powers.size() == 9);
  CHECK(powers.front() == doctest::Approx(0.2e-3));
  CHECK(powers.back() == doctest::Approx(1.8e-3));
  std::vector<double> vp, vq, flat(9, 0.7);
  for (double p : powers) {
    vp.push_back(1234.5 * p + 0.03);
    vq.push_back(987.0 * p + 0.01);
  }
  const auto fit = calibrate_from_variances(powers, vp, vq);
  CHECK(std::fabs(fit.p.slope - 1234.5) < 1e-12 * 1234.5);
  CHECK(std::fabs(fit.p.intercept - 0.03) < 1e-12);
  CHECK(std::fabs(fit.q.slope - 987.0) < 1e-12 * 987.0);
  CHECK(fit.p.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  const auto c = calibrate_from_variances(powers, flat, flat);
  CHECK(std::fabs(c.p.slope) < 1e-9);
  CHECK(c.p.intercept == doctest::Approx(0.7));

  const std::vector<double> two = {1e-3, 2e-3}, v2 = {1, 2};
  CHECK_THROWS_AS(calibrate_from_variances(two, v2, v2), bhd::DomainError);
  const std::vector<double> dup = {1e-3, 1e-3, 2e-3}, v3 = {1, 1, 2};
  CHECK_THROWS_AS(calibrate_from_variances(dup, v3, v3), bhd::DomainError);
}

TEST_CASE("calibration on simulated streams") {
  HeterodyneModel m;
  m.slope_q = 1.3e3;
  const auto fit = calibrate_shot_noise(calibration_streams(m, 1'000'000));
  CHECK(fit.p.slope == doctest::Approx(m.slope_p).epsilon(0.05));
  CHECK(fit.q.slope == doctest::Approx(m.slope_q).epsilon(0.05));
  CHECK(fit.p.intercept >= 0);
  CHECK(fit.q.intercept >= 0);
  CHECK(fit.p.r_squared > 0.999);
  CHECK(fit.q.r_squared > 0.999);
}

TEST_CASE("normalization") {
  const auto m = shot_only();
  const auto fit = calibrate_shot_noise(calibration_streams(m, 200'000));
  const auto s = generate_heterodyne_stream(m, 1e-3, 1'000'000);
  const auto pts = normalize_quadratures(s, fit, 1e-3);
  CHECK(pts.var_re == doctest::Approx(0.5).epsilon(0.02));
  CHECK(pts.var_im == doctest::Approx(0.5).epsilon(0.02));
  CHECK_FALSE(pts.degenerate);

  // Doubling raw voltages quadruples the fitted slope; the result is unchanged.
  QuadratureStream twice = s;
  for (auto& v : twice.p) v *= 2;
  for (auto& v : twice.q) v *= 2;
  CalibrationFit f4 = fit;
  f4.p.slope *= 4;
  f4.q.slope *= 4;
  const auto pts2 = normalize_quadratures(twice, f4, 1e-3);
  CHECK(pts2.var_re == doctest::Approx(pts.var_re).epsilon(1e-12));
  CHECK(pts2.re[17] == doctest::Approx(pts.re[17]).epsilon(1e-12));

  QuadratureStream flat{std::vector<double>(100, 0.3), std::vector<double>(100, -0.1), 1e-3, 1e9};
  CHECK(normalize_quadratures(flat, fit, 1e-3).degenerate);

  CalibrationFit bad = fit;
  bad.p.slope = 0;
  CHECK_THROWS_AS(normalize_quadratures(s, bad, 1e-3), bhd::CalibrationError);
}

TEST_CASE("theoretical vacuum Husimi") {
  CHECK(vacuum_husimi(0, 0) == kInvPi);
  CHECK(vacuum_husimi(1, 0) == doctest::Approx(0.11709).epsilon(1e-4));
  const GridSpec g3{3, -1.5, 1.5};
  const auto t3 = theoretical_vacuum_husimi(g3);
  CHECK(t3.at(1, 1) == kInvPi);
  CHECK(t3.at(2, 1) == doctest::Approx(kInvPi / std::numbers::e).epsilon(1e-15));

  const auto t = theoretical_vacuum_husimi(GridSpec{});
  const std::size_t n = t.spec.n;
  for (std::size_t ix = 0; ix < n; ++ix)
    for (std::size_t iy = 0; iy < n; ++iy) {
      CHECK(std::fabs(t.at(ix, iy) - t.at(iy, ix)) < 1e-15);
      CHECK(std::fabs(t.at(ix, iy) - t.at(n - 1 - ix, iy)) < 1e-15);
    }
  CHECK(t.mass() > 0.98);
  CHECK(t.mass() <= 1.0);
  CHECK(compare_husimi(t, t) == doctest::Approx(t.mass()));
}

TEST_CASE("histogram accounting") {
  PhasePoints origin{std::vector<double>(500, 0.0), std::vector<double>(500, 0.0), 0, 0, true};
  const auto h = reconstruct_husimi(origin, GridSpec{});
  std::size_t hot = 0;
  for (double d : h.density) hot += d > 0;
  CHECK(hot == 1);
  CHECK(h.at(32, 32) == doctest::Approx(1.0 / h.cell_area));
  CHECK(h.mass() == doctest::Approx(1.0));

  PhasePoints spread{{0.1, 5.0, -0.2, 2.9}, {0.0, 0.0, 3.0, -3.0}, 0, 0, false};
  const auto s = reconstruct_husimi(spread, GridSpec{});
  CHECK(s.outside == 2);  // 5.0 and the im = 3.0 edge
  CHECK(s.mass() == doctest::Approx(0.5));
  CHECK_FALSE(s.warnings.empty());
  CHECK_THROWS_AS(reconstruct_husimi(spread, GridSpec{0, -1, 1}), bhd::DomainError);
}

TEST_CASE("vacuum reconstruction matches theory") {
  const auto m = shot_only(7);
  const auto fit = calibrate_shot_noise(calibration_streams(m, 200'000));
  const auto pts = normalize_quadratures(generate_heterodyne_stream(m, 1e-3, 1'000'000), fit, 1e-3);
  const auto h = reconstruct_husimi(pts, GridSpec{});
  const auto t = theoretical_vacuum_husimi(GridSpec{});
  CHECK(compare_husimi(h, t) >= 0.995);
  CHECK(*std::max_element(h.density.begin(), h.density.end()) == doctest::Approx(kInvPi).epsilon(0.05));
  CHECK(h.warnings.empty());

  const auto few = reconstruct_husimi(normalize_quadratures(generate_heterodyne_stream(m, 1e-3, 5000), fit, 1e-3),
                                      GridSpec{});
  CHECK_FALSE(few.warnings.empty());
}

TEST_CASE("overlap improves with sample count") {
  const auto t = theoretical_vacuum_husimi(GridSpec{});
  for (std::uint64_t seed : {11, 12, 13}) {
    const auto m = shot_only(seed);
    const auto fit = calibrate_shot_noise(calibration_streams(m, 100'000));
    auto overlap = [&](std::size_t n) {
      return compare_husimi(reconstruct_husimi(normalize_quadratures(generate_heterodyne_stream(m, 1e-3, n), fit, 1e-3),
                                               GridSpec{}),
                            t);
    };
    CHECK(overlap(10'000) <= overlap(1'000'000));
  }
}

TEST_CASE("comparison edge cases") {
  GridSpec g{4, -1, 1};
  HusimiGrid a{g, std::vector<double>(16, 0.0), 0.25, 1, 0, {}};
  HusimiGrid b = a;
  a.density[0] = 4;
  b.density[15] = 4;
  CHECK(compare_husimi(a, b) == 0.0);
  CHECK(compare_husimi(a, a) == doctest::Approx(1.0));
  CHECK_THROWS_AS(compare_husimi(a, theoretical_vacuum_husimi(GridSpec{})), bhd::DomainError);
  CHECK(husimi_csv(theoretical_vacuum_husimi(GridSpec{1, -1, 1})).rfind("re_alpha,im_alpha,density\n", 0) == 0);
}
