#include "bhd/rf_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bhd/error.hpp"

namespace bhd::rf {

FrequencySweep::FrequencySweep(std::vector<double> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i] > 0) || !std::isfinite(points_[i]))
      throw DomainError("FrequencySweep: frequencies must be finite and > 0");
    if (i > 0 && !(points_[i] > points_[i - 1]))
      throw DomainError("FrequencySweep: frequencies must be strictly increasing");
  }
}

FrequencySweep FrequencySweep::linear(double start, double stop, std::size_t count) {
  if (count == 0) throw DomainError("FrequencySweep::linear: count must be > 0");
  if (count == 1) return FrequencySweep({start});
  std::vector<double> pts(count);
  for (std::size_t i = 0; i < count; ++i)
    pts[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
  pts.back() = stop;
  return FrequencySweep(std::move(pts));
}

Complex element(const SMatrix& s, SParam p) noexcept {
  switch (p) {
    case SParam::S11: return s.s11;
    case SParam::S12: return s.s12;
    case SParam::S21: return s.s21;
    case SParam::S22: return s.s22;
  }
  return {};
}

std::string_view to_string(SParam p) {
  switch (p) {
    case SParam::S11: return "S11";
    case SParam::S12: return "S12";
    case SParam::S21: return "S21";
    case SParam::S22: return "S22";
  }
  return "?";
}

SParam parse_sparam(std::string_view text) {
  if (text == "S11") return SParam::S11;
  if (text == "S12") return SParam::S12;
  if (text == "S21") return SParam::S21;
  if (text == "S22") return SParam::S22;
  throw DomainError("unknown S-parameter '" + std::string(text) + "'");
}

void TwoPortNetwork::validate() const {
  if (s.size() != sweep.size()) throw DomainError("TwoPortNetwork: one S-matrix per sweep point required");
  if (!(z_ref > 0)) throw DomainError("TwoPortNetwork: z_ref must be > 0");
}

TwoPortNetwork thru(const FrequencySweep& sweep, double z_ref) {
  TwoPortNetwork n{sweep, std::vector<SMatrix>(sweep.size(), SMatrix{0.0, 1.0, 1.0, 0.0}), z_ref};
  n.validate();
  return n;
}

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::series_inductor: return "series_inductor";
    case ElementKind::series_capacitor: return "series_capacitor";
    case ElementKind::shunt_inductor: return "shunt_inductor";
    case ElementKind::shunt_capacitor: return "shunt_capacitor";
    case ElementKind::series_resistor: return "series_resistor";
    case ElementKind::shunt_resistor: return "shunt_resistor";
    case ElementKind::sparam_block: return "sparam_block";
  }
  return "?";
}

ElementKind parse_element_kind(std::string_view text) {
  for (auto k : {ElementKind::series_inductor, ElementKind::series_capacitor, ElementKind::shunt_inductor,
                 ElementKind::shunt_capacitor, ElementKind::series_resistor, ElementKind::shunt_resistor,
                 ElementKind::sparam_block})
    if (to_string(k) == text) return k;
  throw DomainError("unknown element kind '" + std::string(text) + "'");
}

LumpedElement LumpedElement::fixed(ElementKind kind, double value, std::string label) {
  return LumpedElement{kind, value, value, value, std::move(label), nullptr};
}

LumpedElement LumpedElement::tunable(ElementKind kind, double value, double min, double max, std::string label) {
  return LumpedElement{kind, value, min, max, std::move(label), nullptr};
}

LumpedElement LumpedElement::sparams(std::shared_ptr<const TwoPortNetwork> block, std::string label) {
  LumpedElement e;
  e.kind = ElementKind::sparam_block;
  e.block = std::move(block);
  e.label = std::move(label);
  return e;
}

void LumpedElement::validate() const {
  if (kind == ElementKind::sparam_block) {
    if (!block) throw DomainError("element " + label + ": sparam_block without network");
    block->validate();
    return;
  }
  if (!(value > 0) || !std::isfinite(value)) throw DomainError("element " + label + ": value must be > 0");
  if (!(min > 0) || !(min <= max)) throw DomainError("element " + label + ": bounds must satisfy 0 < min <= max");
  if (value < min || value > max) throw DomainError("element " + label + ": value outside bounds");
}

namespace {

SMatrix series_impedance(Complex z, double z0) {
  const Complex den = 2.0 * z0 + z;
  const Complex s11 = z / den;
  const Complex s21 = 2.0 * z0 / den;
  return {s11, s21, s21, s11};
}

SMatrix shunt_admittance(Complex y, double z0) {
  const Complex zy = z0 * y;
  const Complex den = 2.0 + zy;
  const Complex s11 = -zy / den;
  const Complex s21 = 2.0 / den;
  return {s11, s21, s21, s11};
}

}  // namespace

TwoPortNetwork synthesize_element(const LumpedElement& e, const FrequencySweep& sweep, double z_ref) {
  if (!(z_ref > 0)) throw DomainError("synthesize_element: z_ref must be > 0");
  if (e.kind == ElementKind::sparam_block) {
    if (!e.block) throw DomainError("synthesize_element: sparam_block without network");
    if (e.block->z_ref != z_ref)
      throw DomainError("synthesize_element: block " + e.label + " reference impedance differs from chain z_ref");
    if (e.block->sweep == sweep) return *e.block;
    return interpolate(*e.block, sweep);
  }
  if (!(e.value > 0)) throw DomainError("synthesize_element: element value must be > 0");

  TwoPortNetwork out{sweep, {}, z_ref};
  out.s.reserve(sweep.size());
  for (double f : sweep.points()) {
    const double w = 2.0 * std::numbers::pi * f;
    const Complex j{0.0, 1.0};
    switch (e.kind) {
      case ElementKind::series_inductor: out.s.push_back(series_impedance(j * w * e.value, z_ref)); break;
      case ElementKind::series_capacitor: out.s.push_back(series_impedance(1.0 / (j * w * e.value), z_ref)); break;
      case ElementKind::series_resistor: out.s.push_back(series_impedance(e.value, z_ref)); break;
      case ElementKind::shunt_inductor: out.s.push_back(shunt_admittance(1.0 / (j * w * e.value), z_ref)); break;
      case ElementKind::shunt_capacitor: out.s.push_back(shunt_admittance(j * w * e.value, z_ref)); break;
      case ElementKind::shunt_resistor: out.s.push_back(shunt_admittance(1.0 / e.value, z_ref)); break;
      case ElementKind::sparam_block: break;
    }
  }
  return out;
}

TwoPortNetwork interpolate(const TwoPortNetwork& n, const FrequencySweep& sweep) {
  n.validate();
  if (n.sweep.empty() || sweep.empty()) throw DomainError("interpolate: empty sweep");
  if (sweep.front() < n.sweep.front() || sweep.back() > n.sweep.back())
    throw DomainError("interpolate: target sweep leaves the tabulated range (extrapolation not allowed)");

  const auto& src = n.sweep.points();
  TwoPortNetwork out{sweep, {}, n.z_ref};
  out.s.reserve(sweep.size());
  for (double f : sweep.points()) {
    auto it = std::lower_bound(src.begin(), src.end(), f);
    const auto hi = static_cast<std::size_t>(it - src.begin());
    if (src[hi] == f) {
      out.s.push_back(n.s[hi]);
      continue;
    }
    const std::size_t lo = hi - 1;
    const double t = (f - src[lo]) / (src[hi] - src[lo]);
    const SMatrix& a = n.s[lo];
    const SMatrix& b = n.s[hi];
    auto mix = [t](Complex x, Complex y) { return x + t * (y - x); };
    out.s.push_back({mix(a.s11, b.s11), mix(a.s12, b.s12), mix(a.s21, b.s21), mix(a.s22, b.s22)});
  }
  return out;
}

namespace {

// Product of the transfer matrices of a and b, T = [b1, a1]^T <- [a2, b2]^T,
// converted back to S. Every entry of T_a T_b carries the factor
// 1 / (S21a S21b); it is cancelled symbolically so that nearly-open or
// heavily attenuating sections do not lose digits to cancellation.
SMatrix cascade_point(const SMatrix& a, const SMatrix& b, double f) {
  if (a.s21 == Complex{0.0, 0.0} || b.s21 == Complex{0.0, 0.0})
    throw SingularityError("cascade: S21 = 0 makes the transfer matrix singular at " + std::to_string(f) + " Hz", f);
  const Complex d = 1.0 - a.s22 * b.s11;  // S21a S21b t22
  if (d == Complex{0.0, 0.0})
    throw SingularityError("cascade: singular product transfer matrix at " + std::to_string(f) + " Hz", f);
  return {a.s11 + a.s12 * a.s21 * b.s11 / d, a.s12 * b.s12 / d, a.s21 * b.s21 / d,
          b.s22 + b.s21 * b.s12 * a.s22 / d};
}

}  // namespace

TwoPortNetwork cascade(const TwoPortNetwork& a, const TwoPortNetwork& b) {
  a.validate();
  b.validate();
  if (!(a.sweep == b.sweep)) throw DomainError("cascade: networks have different frequency sweeps");
  if (a.z_ref != b.z_ref) throw DomainError("cascade: networks have different reference impedances");
  TwoPortNetwork out{a.sweep, {}, a.z_ref};
  out.s.reserve(a.s.size());
  for (std::size_t i = 0; i < a.s.size(); ++i) out.s.push_back(cascade_point(a.s[i], b.s[i], a.sweep[i]));
  return out;
}

TwoPortNetwork evaluate_chain(const NetworkTopology& t, const FrequencySweep& sweep, double z_ref) {
  if (t.empty()) throw DomainError("evaluate_chain: topology is empty");
  TwoPortNetwork acc = synthesize_element(t.front(), sweep, z_ref);
  for (std::size_t i = 1; i < t.size(); ++i) acc = cascade(acc, synthesize_element(t[i], sweep, z_ref));
  return acc;
}

std::string_view to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::stable: return "stable";
    case StabilityClass::potentially_unstable: return "potentially_unstable";
    case StabilityClass::indeterminate: return "indeterminate";
  }
  return "?";
}

namespace {

// num / den with den >= 0: signed infinity for den = 0, NaN for 0/0.
double safe_ratio(double num, double den) {
  if (den != 0.0) return num / den;
  if (num > 0) return std::numeric_limits<double>::infinity();
  if (num < 0) return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

StabilityReport stability_factors(const TwoPortNetwork& n) {
  n.validate();
  StabilityReport r;
  r.points.reserve(n.s.size());
  bool all_stable = !n.s.empty();
  for (std::size_t i = 0; i < n.s.size(); ++i) {
    const SMatrix& s = n.s[i];
    const Complex delta = s.det();
    const double a11 = std::norm(s.s11);
    const double a22 = std::norm(s.s22);
    const double loop = std::abs(s.s12 * s.s21);

    StabilityPoint p;
    p.frequency = n.sweep[i];
    p.k_factor = safe_ratio(1.0 - a11 - a22 + std::norm(delta), 2.0 * loop);
    p.mu_load = safe_ratio(1.0 - a11, std::abs(s.s22 - delta * std::conj(s.s11)) + loop);
    p.mu_source = safe_ratio(1.0 - a22, std::abs(s.s11 - delta * std::conj(s.s22)) + loop);

    if (std::isnan(p.k_factor) || std::isnan(p.mu_load) || std::isnan(p.mu_source))
      p.status = StabilityClass::indeterminate;
    else if (p.k_factor > 1.0 && p.mu_load > 1.0 && p.mu_source > 1.0)
      p.status = StabilityClass::stable;
    else
      p.status = StabilityClass::potentially_unstable;
    all_stable = all_stable && p.status == StabilityClass::stable;
    r.points.push_back(p);
  }
  r.stable_everywhere = all_stable;
  return r;
}

double magnitude_db(Complex z) noexcept { return 20.0 * std::log10(std::abs(z)); }

std::string sparams_csv(const TwoPortNetwork& n) {
  std::ostringstream os;
  os.precision(12);
  os << "frequency_hz,s11_db,s11_deg,s21_db,s21_deg,s12_db,s12_deg,s22_db,s22_deg\n";
  const double deg = 180.0 / std::numbers::pi;
  for (std::size_t i = 0; i < n.s.size(); ++i) {
    const auto& s = n.s[i];
    os << n.sweep[i];
    for (Complex z : {s.s11, s.s21, s.s12, s.s22}) os << ',' << magnitude_db(z) << ',' << std::arg(z) * deg;
    os << '\n';
  }
  return os.str();
}

std::string stability_csv(const StabilityReport& r) {
  std::ostringstream os;
  os.precision(12);
  os << "frequency_hz,k_factor,mu_source,mu_load,status\n";
  for (const auto& p : r.points)
    os << p.frequency << ',' << p.k_factor << ',' << p.mu_source << ',' << p.mu_load << ',' << to_string(p.status)
       << '\n';
  return os.str();
}

}  // namespace bhd::rf
