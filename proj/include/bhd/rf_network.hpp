#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace bhd::rf {

using Complex = std::complex<double>;

/// Strictly increasing list of positive frequencies in Hz.
class FrequencySweep {
public:
  FrequencySweep() = default;
  explicit FrequencySweep(std::vector<double> points);
  /// `count` evenly spaced points from start to stop inclusive.
  static FrequencySweep linear(double start, double stop, std::size_t count);

  const std::vector<double>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  double operator[](std::size_t i) const noexcept { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }

  bool operator==(const FrequencySweep&) const = default;

private:
  std::vector<double> points_;
};

/// 2x2 scattering matrix at one frequency.
struct SMatrix {
  Complex s11, s12, s21, s22;

  Complex det() const noexcept { return s11 * s22 - s12 * s21; }
};

enum class SParam { S11, S12, S21, S22 };
Complex element(const SMatrix& s, SParam p) noexcept;
std::string_view to_string(SParam p);
SParam parse_sparam(std::string_view text);

struct TwoPortNetwork {
  FrequencySweep sweep;
  std::vector<SMatrix> s;
  double z_ref = 50.0;

  /// One matrix per sweep point and z_ref > 0.
  void validate() const;
};

/// S11 = S22 = 0, S12 = S21 = 1 at every sweep point.
TwoPortNetwork thru(const FrequencySweep& sweep, double z_ref);

// ---------------------------------------------------------------------------
// Touchstone v1 (.s2p)

/// Parses a Touchstone v1 two-port file. Honors the `# <unit> S <MA|DB|RI>
/// R <z>` option line; data columns are S11 S21 S12 S22. A trailing noise
/// parameter block (5-column rows restarting at a lower frequency) is
/// skipped. Throws ParseError with the offending line number.
TwoPortNetwork parse_touchstone(std::string_view text);
TwoPortNetwork read_touchstone(const std::filesystem::path& path);

/// Writes `# Hz S RI R <z_ref>` with round-trip precision.
std::string write_touchstone(const TwoPortNetwork& n);

// ---------------------------------------------------------------------------
// Lumped-element synthesis and cascading

enum class ElementKind {
  series_inductor,
  series_capacitor,
  shunt_inductor,
  shunt_capacitor,
  series_resistor,
  shunt_resistor,
  sparam_block,
};

std::string_view to_string(ElementKind kind);
ElementKind parse_element_kind(std::string_view text);

/// One link of a cascade. Value in H, F or ohm depending on kind; `block`
/// is only used by sparam_block. An element is tunable when it is passive
/// and min < max.
struct LumpedElement {
  ElementKind kind = ElementKind::series_resistor;
  double value = 0;
  double min = 0;
  double max = 0;
  std::string label;
  std::shared_ptr<const TwoPortNetwork> block;

  /// Fixed element (min = max = value).
  static LumpedElement fixed(ElementKind kind, double value, std::string label = {});
  static LumpedElement tunable(ElementKind kind, double value, double min, double max, std::string label = {});
  static LumpedElement sparams(std::shared_ptr<const TwoPortNetwork> block, std::string label = {});

  bool is_passive() const noexcept { return kind != ElementKind::sparam_block; }
  bool is_tunable() const noexcept { return is_passive() && min < max; }
  void validate() const;
};

/// Elements in cascade order, source to load.
using NetworkTopology = std::vector<LumpedElement>;

TwoPortNetwork synthesize_element(const LumpedElement& e, const FrequencySweep& sweep, double z_ref);

/// Resamples `n` onto `sweep`, linear in real and imaginary parts. Throws
/// DomainError if any target point lies outside the tabulated range.
TwoPortNetwork interpolate(const TwoPortNetwork& n, const FrequencySweep& sweep);

/// Cascade through transfer parameters. Associative; thru is the identity.
TwoPortNetwork cascade(const TwoPortNetwork& a, const TwoPortNetwork& b);

/// Left fold of `cascade` over the synthesized elements.
TwoPortNetwork evaluate_chain(const NetworkTopology& t, const FrequencySweep& sweep, double z_ref);

// ---------------------------------------------------------------------------
// Stability

enum class StabilityClass { stable, potentially_unstable, indeterminate };
std::string_view to_string(StabilityClass c);

struct StabilityPoint {
  double frequency = 0;
  double k_factor = 0;
  double mu_source = 0;
  double mu_load = 0;
  /// indeterminate when any factor is a 0/0 form (that factor is NaN).
  StabilityClass status = StabilityClass::indeterminate;
};

struct StabilityReport {
  std::vector<StabilityPoint> points;
  bool stable_everywhere = false;
};

/// Rollett K and Edwards-Sinsky mu factors at each frequency. K is +inf when
/// S12 S21 = 0 with a positive numerator.
StabilityReport stability_factors(const TwoPortNetwork& n);

/// Magnitude in dB, 20 log10 |z|.
double magnitude_db(Complex z) noexcept;

/// CSV with frequency_hz and |S|/angle columns.
std::string sparams_csv(const TwoPortNetwork& n);
std::string stability_csv(const StabilityReport& r);

}  // namespace bhd::rf
