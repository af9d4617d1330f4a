#include "bhd/detector_design.hpp"

#include <cmath>
#include <sstream>

#include "bhd/error.hpp"

namespace bhd::design {

std::string_view to_string(Mode mode) {
  return mode == Mode::paper_literal ? "paper-literal" : "standard";
}

Mode parse_mode(std::string_view text) {
  if (text == "paper-literal" || text == "paper_literal") return Mode::paper_literal;
  if (text == "standard") return Mode::standard;
  throw DomainError("unknown mode '" + std::string(text) + "' (expected paper-literal or standard)");
}

void PhotodiodeSpec::validate() const {
  if (!(responsivity > 0)) throw DomainError("photodiode " + label + ": responsivity must be > 0");
  if (!(dark_current >= 0)) throw DomainError("photodiode " + label + ": dark_current must be >= 0");
  if (!(shunt_resistance > 0)) throw DomainError("photodiode " + label + ": shunt_resistance must be > 0");
  if (!(bandwidth > 0)) throw DomainError("photodiode " + label + ": bandwidth must be > 0");
  if (!(junction_capacitance >= 0)) throw DomainError("photodiode " + label + ": junction_capacitance must be >= 0");
}

void AmplifierStageSpec::validate() const {
  if (!std::isfinite(gain_db)) throw DomainError("amplifier " + label + ": gain_db must be finite");
  if (!std::isfinite(noise_figure_db)) throw DomainError("amplifier " + label + ": noise_figure_db must be finite");
  if (!(bandwidth > 0)) throw DomainError("amplifier " + label + ": bandwidth must be > 0");
}

void Environment::validate() const {
  if (!(temperature > 0)) throw DomainError("environment: temperature must be > 0");
  if (!(optical_power >= 0)) throw DomainError("environment: optical_power must be >= 0");
}

double shot_noise_limited_snr(const PhotodiodeSpec& pd, const Environment& env) {
  if (!(env.optical_power > 0)) throw DomainError("shot_noise_limited_snr: optical power must be > 0");
  if (!(pd.shunt_resistance > 0)) throw DomainError("shot_noise_limited_snr: shunt resistance must be > 0");
  pd.validate();
  env.validate();
  const double shot = 2.0 * kElementaryCharge * env.optical_power * pd.responsivity;
  const double thermal = 4.0 * kBoltzmann * env.temperature / pd.shunt_resistance;
  const double dark = 2.0 * kElementaryCharge * pd.dark_current;
  return 10.0 * std::log10(shot / (thermal + dark));
}

double cascade_noise_figure(const AmplifierStageSpec& stage1, const AmplifierStageSpec& stage2, Mode mode) {
  stage1.validate();
  stage2.validate();
  if (mode == Mode::paper_literal) {
    if (stage1.gain_db == 0.0) throw DomainError("cascade_noise_figure: first-stage gain of 0 dB");
    return stage1.noise_figure_db + (stage2.noise_figure_db - 1.0) / stage1.gain_db;
  }
  const double f1 = std::pow(10.0, stage1.noise_figure_db / 10.0);
  const double f2 = std::pow(10.0, stage2.noise_figure_db / 10.0);
  const double g1 = std::pow(10.0, stage1.gain_db / 10.0);
  if (g1 == 0.0) throw DomainError("cascade_noise_figure: first-stage linear gain underflows to 0");
  return 10.0 * std::log10(f1 + (f2 - 1.0) / g1);
}

double detector_output_snr(double input_snr_db, double nf_db, Mode mode) {
  if (mode == Mode::paper_literal) return input_snr_db / std::pow(10.0, nf_db / 10.0);
  return input_snr_db - nf_db;
}

double snr_from_powers(double p_signal, double p_elec) {
  if (!(p_signal > 0) || !(p_elec > 0)) throw DomainError("snr_from_powers: powers must be > 0");
  return 10.0 * std::log10(p_signal / p_elec);
}

double round_half_even(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // Snap to 12 significant digits first so that a decimal tie such as
  // 37.445 (stored as 37.44499999...) is recognised as a tie.
  std::ostringstream os;
  os.precision(12);
  os << value * scale;
  const double scaled = std::stod(os.str());
  const double fl = std::floor(scaled);
  const double frac = scaled - fl;
  double r = fl;
  if (frac > 0.5 || (frac == 0.5 && std::fmod(fl, 2.0) != 0.0)) r = fl + 1.0;
  return r / scale;
}

SnrReport detector_chain(const PhotodiodeSpec& pd, const Environment& env, const AmplifierStageSpec& stage1,
                         const AmplifierStageSpec& stage2, Mode mode) {
  double input_snr = shot_noise_limited_snr(pd, env);
  double nf = cascade_noise_figure(stage1, stage2, mode);
  if (mode == Mode::paper_literal) {
    input_snr = round_half_even(input_snr);
    nf = round_half_even(nf);
  }
  SnrReport r;
  r.value_db = detector_output_snr(input_snr, nf, mode);
  r.mode = mode;
  std::ostringstream echo;
  echo.precision(10);
  echo << "photodiode=" << pd.label << " P=" << env.optical_power << "W T=" << env.temperature
       << "K stage1=" << stage1.label << " stage2=" << stage2.label << " input_snr_db=" << input_snr
       << " nf_db=" << nf;
  r.inputs_echo = echo.str();
  return r;
}

const std::vector<PhotodiodeSpec>& photodiode_catalog() {
  // G8195 is omitted: no shunt resistance is published for it.
  static const std::vector<PhotodiodeSpec> table = {
      {"LSIPD-A75", 0.90, 18e-12, 50e9, 1.0e-12, 2.5e9},
      {"LSIPD-A40", 0.85, 20e-12, 30e9, 0.4e-12, 6.0e9},
      {"LSIPD-LD50", 0.90, 5.0e-12, 100e9, 0.8e-12, 3.0e9},
  };
  return table;
}

const std::vector<AmplifierStageSpec>& amplifier_catalog() {
  static const std::vector<AmplifierStageSpec> table = {
      {"BGM1013", 35.5, 4.6, 3.0e9},
      {"BGA2817", 24.3, 3.9, 2.15e9},
      {"ABA-52563", 21.5, 3.3, 3.5e9},
  };
  return table;
}

const PhotodiodeSpec& find_photodiode(std::string_view label) {
  // The vendor prefix is optional: "LD50" finds "LSIPD-LD50".
  for (const auto& pd : photodiode_catalog()) {
    const std::string_view full = pd.label;
    if (full == label) return pd;
    if (full.size() > label.size() && full.ends_with(label) && full[full.size() - label.size() - 1] == '-') return pd;
  }
  throw DomainError("unknown photodiode '" + std::string(label) + "'");
}

const AmplifierStageSpec& find_amplifier(std::string_view label) {
  for (const auto& a : amplifier_catalog())
    if (a.label == label) return a;
  throw DomainError("unknown amplifier '" + std::string(label) + "'");
}

}  // namespace bhd::design
