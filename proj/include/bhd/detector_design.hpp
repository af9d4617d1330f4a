#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bhd::design {

/// CODATA 2018 exact values.
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kBoltzmann = 1.380649e-23;            // J/K

/// How the noise-figure and output-SNR formulas are evaluated.
///  - paper_literal: dB values are substituted straight into the linear
///    formulas, which is what reproduces the published tables.
///  - standard: conventional linear-domain Friis / dB subtraction.
enum class Mode { paper_literal, standard };

std::string_view to_string(Mode mode);
/// Accepts "paper-literal", "paper_literal", "standard".
Mode parse_mode(std::string_view text);

struct PhotodiodeSpec {
  std::string label;
  double responsivity = 0;          // A/W
  double dark_current = 0;          // A
  double shunt_resistance = 0;      // ohm
  double junction_capacitance = 0;  // F
  double bandwidth = 0;             // Hz

  void validate() const;
};

struct AmplifierStageSpec {
  std::string label;
  double gain_db = 0;
  double noise_figure_db = 0;
  double bandwidth = 0;  // Hz

  void validate() const;
};

struct Environment {
  double temperature = 300.0;   // K
  double optical_power = 1e-3;  // W

  void validate() const;
};

struct SnrReport {
  double value_db = 0;
  Mode mode = Mode::standard;
  std::string inputs_echo;
};

/// Shot-noise-limited photodiode SNR in dB:
/// 10 log10(2 e P S / (4 k T / R_sh + 2 e i_dark)).
double shot_noise_limited_snr(const PhotodiodeSpec& pd, const Environment& env);

/// Total noise figure of a two-stage cascade, in dB.
double cascade_noise_figure(const AmplifierStageSpec& stage1, const AmplifierStageSpec& stage2, Mode mode);

/// SNR after the amplifier chain. paper_literal divides the dB input by the
/// linear noise factor; standard subtracts dB.
double detector_output_snr(double input_snr_db, double nf_db, Mode mode);

/// 10 log10(p_signal / p_elec).
double snr_from_powers(double p_signal, double p_elec);

/// Round-half-even to `decimals` places. Presentation only.
double round_half_even(double value, int decimals = 2);

/// Photodiode -> two identical-or-not amplifier stages -> output SNR.
/// In paper_literal mode the intermediate SNR and noise figure are rounded
/// to two decimals before being chained, matching the published figures.
SnrReport detector_chain(const PhotodiodeSpec& pd, const Environment& env, const AmplifierStageSpec& stage1,
                         const AmplifierStageSpec& stage2, Mode mode);

/// Built-in component records (photodiodes with a published shunt
/// resistance; RF amplifier chips).
const std::vector<PhotodiodeSpec>& photodiode_catalog();
const std::vector<AmplifierStageSpec>& amplifier_catalog();
const PhotodiodeSpec& find_photodiode(std::string_view label);
const AmplifierStageSpec& find_amplifier(std::string_view label);

}  // namespace bhd::design
