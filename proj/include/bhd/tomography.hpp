#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bhd::tomo {

/// Two independent Gaussian quadrature channels whose variance grows
/// linearly with LO power: var = slope * P + intercept (V^2, P in W).
struct HeterodyneModel {
  double slope_p = 1.0e3;
  double intercept_p = 0.02;
  double slope_q = 1.0e3;
  double intercept_q = 0.02;
  double sample_rate = 0.8e9;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

struct QuadratureStream {
  std::vector<double> p;
  std::vector<double> q;
  double lo_power = 0;
  double sample_rate = 0;
};

/// Deterministic in (rng_seed, lo_power).
QuadratureStream generate_heterodyne_stream(const HeterodyneModel& m, double lo_power, std::size_t n);

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct CalibrationFit {
  LineFit p;
  LineFit q;
};

/// 0.2 .. 1.8 mW in 0.2 mW steps, in W.
std::vector<double> calibration_powers();

double sample_variance(std::span<const double> v);

/// Fits variance against power per quadrature. Needs >= 3 distinct powers.
CalibrationFit calibrate_from_variances(std::span<const double> powers, std::span<const double> var_p,
                                        std::span<const double> var_q);
CalibrationFit calibrate_shot_noise(std::span<const QuadratureStream> streams);

struct PhasePoints {
  std::vector<double> re;
  std::vector<double> im;
  double var_re = 0;
  double var_im = 0;
  /// Zero sample variance on an axis.
  bool degenerate = false;
};

/// Mean-subtracts and divides each axis by sqrt(2 * slope * at_power), so
/// pure shot noise ends up with variance 1/2 per axis.
PhasePoints normalize_quadratures(const QuadratureStream& s, const CalibrationFit& fit, double at_power);

/// Square grid of n x n cells over [lo, hi)^2; cells are half-open.
struct GridSpec {
  std::size_t n = 64;
  double lo = -3.0;
  double hi = 3.0;

  void validate() const;
  double cell_width() const { return (hi - lo) / static_cast<double>(n); }
  double center(std::size_t k) const { return lo + (static_cast<double>(k) + 0.5) * cell_width(); }
  bool operator==(const GridSpec&) const = default;
};

struct HusimiGrid {
  GridSpec spec;
  /// density[ix * n + iy], ix along Re(alpha), iy along Im(alpha).
  std::vector<double> density;
  double cell_area = 0;
  std::size_t points = 0;
  std::size_t outside = 0;
  std::vector<std::string> warnings;

  double at(std::size_t ix, std::size_t iy) const { return density[ix * spec.n + iy]; }
  /// Sum of density * cell_area.
  double mass() const;
};

/// Histogram estimate: counts / (total points * cell_area). Warns when 2% or
/// more of the points fall outside the grid.
HusimiGrid reconstruct_husimi(const PhasePoints& pts, const GridSpec& spec);

/// exp(-|alpha|^2) / pi.
double vacuum_husimi(double re, double im);
HusimiGrid theoretical_vacuum_husimi(const GridSpec& spec);

/// Bhattacharyya overlap sum sqrt(a * b) * cell_area.
double compare_husimi(const HusimiGrid& a, const HusimiGrid& b);

/// "re_alpha,im_alpha,density" CSV.
std::string husimi_csv(const HusimiGrid& g);

}  // namespace bhd::tomo
