#include "bhd/tomography.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "bhd/error.hpp"
#include "bhd/random.hpp"

namespace bhd::tomo {

void HeterodyneModel::validate() const {
  for (double v : {slope_p, intercept_p, slope_q, intercept_q})
    if (!(v >= 0) || !std::isfinite(v)) throw DomainError("HeterodyneModel: slopes and intercepts must be finite and >= 0");
  if (!(sample_rate > 0)) throw DomainError("HeterodyneModel: sample_rate must be > 0");
}

QuadratureStream generate_heterodyne_stream(const HeterodyneModel& m, double lo_power, std::size_t n) {
  m.validate();
  if (!(lo_power >= 0)) throw DomainError("generate_heterodyne_stream: lo_power must be >= 0");
  if (n == 0) throw DomainError("generate_heterodyne_stream: n must be > 0");
  const std::uint64_t power_bits = std::bit_cast<std::uint64_t>(lo_power);
  GaussianSource gp(derive_key(m.rng_seed, 0x50, power_bits));
  GaussianSource gq(derive_key(m.rng_seed, 0x51, power_bits));
  const double sp = std::sqrt(m.slope_p * lo_power + m.intercept_p);
  const double sq = std::sqrt(m.slope_q * lo_power + m.intercept_q);
  QuadratureStream s{std::vector<double>(n), std::vector<double>(n), lo_power, m.sample_rate};
  for (std::size_t i = 0; i < n; ++i) {
    s.p[i] = sp * gp();
    s.q[i] = sq * gq();
  }
  return s;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("fit_line: x and y differ in length");
  if (x.size() < 2) throw DomainError("fit_line: need at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw DomainError("fit_line: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += r * r;
  }
  if (syy == 0)
    f.r_squared = 1.0;  // constant data is fitted exactly by a flat line
  else
    f.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return f;
}

std::vector<double> calibration_powers() {
  std::vector<double> p;
  for (int k = 1; k <= 9; ++k) p.push_back(0.2e-3 * k);
  return p;
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) throw DomainError("sample_variance: need at least 2 values");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

CalibrationFit calibrate_from_variances(std::span<const double> powers, std::span<const double> var_p,
                                        std::span<const double> var_q) {
  if (std::set<double>(powers.begin(), powers.end()).size() < 3)
    throw DomainError("calibrate_shot_noise: need at least 3 distinct LO powers");
  return {fit_line(powers, var_p), fit_line(powers, var_q)};
}

CalibrationFit calibrate_shot_noise(std::span<const QuadratureStream> streams) {
  std::vector<double> powers, vp, vq;
  for (const auto& s : streams) {
    powers.push_back(s.lo_power);
    vp.push_back(sample_variance(s.p));
    vq.push_back(sample_variance(s.q));
  }
  return calibrate_from_variances(powers, vp, vq);
}

PhasePoints normalize_quadratures(const QuadratureStream& s, const CalibrationFit& fit, double at_power) {
  if (!(fit.p.slope > 0) || !(fit.q.slope > 0))
    throw CalibrationError("normalize_quadratures: calibration slope must be > 0");
  if (!(at_power > 0)) throw DomainError("normalize_quadratures: at_power must be > 0");
  if (s.p.size() != s.q.size() || s.p.empty()) throw DomainError("normalize_quadratures: bad stream");

  auto normalize = [](std::span<const double> v, double scale, std::vector<double>& out) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean) / scale;
  };
  PhasePoints pts;
  normalize(s.p, std::sqrt(2.0 * fit.p.slope * at_power), pts.re);
  normalize(s.q, std::sqrt(2.0 * fit.q.slope * at_power), pts.im);
  if (pts.re.size() >= 2) {
    pts.var_re = sample_variance(pts.re);
    pts.var_im = sample_variance(pts.im);
  }
  pts.degenerate = pts.var_re == 0 || pts.var_im == 0;
  return pts;
}

void GridSpec::validate() const {
  if (n == 0) throw DomainError("GridSpec: n must be > 0");
  if (!(lo < hi)) throw DomainError("GridSpec: need lo < hi");
}

double HusimiGrid::mass() const { return std::accumulate(density.begin(), density.end(), 0.0) * cell_area; }

HusimiGrid reconstruct_husimi(const PhasePoints& pts, const GridSpec& spec) {
  spec.validate();
  if (pts.re.empty() || pts.re.size() != pts.im.size()) throw DomainError("reconstruct_husimi: no points");
  HusimiGrid g;
  g.spec = spec;
  const double w = spec.cell_width();
  g.cell_area = w * w;
  g.points = pts.re.size();
  std::vector<std::size_t> counts(spec.n * spec.n, 0);
  auto cell = [&](double v) -> std::ptrdiff_t {
    if (!(v >= spec.lo && v < spec.hi)) return -1;
    return std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>((v - spec.lo) / w), static_cast<std::ptrdiff_t>(spec.n) - 1);
  };
  for (std::size_t i = 0; i < g.points; ++i) {
    const auto ix = cell(pts.re[i]);
    const auto iy = cell(pts.im[i]);
    if (ix < 0 || iy < 0) {
      ++g.outside;
      continue;
    }
    ++counts[static_cast<std::size_t>(ix) * spec.n + static_cast<std::size_t>(iy)];
  }
  const double norm = 1.0 / (static_cast<double>(g.points) * g.cell_area);
  g.density.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) g.density[k] = static_cast<double>(counts[k]) * norm;
  if (static_cast<double>(g.outside) >= 0.02 * static_cast<double>(g.points))
    g.warnings.push_back(std::to_string(g.outside) + " of " + std::to_string(g.points) +
                         " points fall outside the grid");
  if (g.points < 10000) g.warnings.push_back("fewer than 1e4 points; histogram will be noisy");
  return g;
}

double vacuum_husimi(double re, double im) { return std::exp(-(re * re + im * im)) / std::numbers::pi; }

HusimiGrid theoretical_vacuum_husimi(const GridSpec& spec) {
  spec.validate();
  HusimiGrid g;
  g.spec = spec;
  g.cell_area = spec.cell_width() * spec.cell_width();
  g.density.resize(spec.n * spec.n);
  for (std::size_t ix = 0; ix < spec.n; ++ix)
    for (std::size_t iy = 0; iy < spec.n; ++iy) g.density[ix * spec.n + iy] = vacuum_husimi(spec.center(ix), spec.center(iy));
  return g;
}

double compare_husimi(const HusimiGrid& a, const HusimiGrid& b) {
  if (!(a.spec == b.spec) || a.density.size() != b.density.size())
    throw DomainError("compare_husimi: grids differ");
  double s = 0;
  for (std::size_t k = 0; k < a.density.size(); ++k) s += std::sqrt(a.density[k] * b.density[k]);
  return s * a.cell_area;
}

std::string husimi_csv(const HusimiGrid& g) {
  std::ostringstream os;
  os.precision(12);
  os << "re_alpha,im_alpha,density\n";
  for (std::size_t ix = 0; ix < g.spec.n; ++ix)
    for (std::size_t iy = 0; iy < g.spec.n; ++iy)
      os << g.spec.center(ix) << ',' << g.spec.center(iy) << ',' << g.at(ix, iy) << '\n';
  return os.str();
}

}  // namespace bhd::tomo
