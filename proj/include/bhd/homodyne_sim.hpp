#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace bhd::homodyne {

/// Statistical model of a balanced homodyne detector looking at vacuum.
/// Powers in W, frequencies in Hz, PSDs one-sided in V^2/Hz.
struct DetectorModel {
  double sample_rate = 5e9;
  /// Shot-noise PSD at DC per mW of effective LO power.
  double shot_noise_psd_per_mw = 1e-12;
  /// White electronic-noise PSD.
  double elec_noise_psd = 1e-16;
  /// Single-pole corner of the shot-noise response.
  double f3db = 1.9e9;
  /// Peak deviation of the sinusoidal in-band ripple, dB. 0 disables it.
  double ripple_db = 0.0;
  double ripple_period = 200e6;
  double ripple_band_lo = 1.3e9;
  double ripple_band_hi = 1.7e9;
  /// LO power above which the response is clamped.
  double saturation_power = 2e-3;
  /// Responsivity ratio PD2/PD1; 1 means perfect subtraction.
  double pd_gain_ratio = 1.0;
  /// Common-mode tone amplitude per mW of LO at full modulation depth.
  double cm_volts_per_mw = 1.0;
  /// 1/f corner of the electronic noise; 0 disables the 1/f term.
  double flicker_corner = 0.0;
  std::uint64_t rng_seed = 1;

  void validate() const;

  /// |H(f)|^2 including ripple (1 at DC without ripple).
  double response_power(double f) const;
  /// Shot-noise PSD at f for LO power `lo_power` (saturation applied).
  double shot_psd(double lo_power, double f) const;
  /// Electronic-noise PSD at f (f > 0 when the 1/f term is on).
  double elec_psd(double f) const;
};

/// Sets `shot_noise_psd_per_mw` so that the shot-to-electronic PSD ratio at
/// (lo_power, f) equals `snr_db`.
void set_shot_to_elec_ratio(DetectorModel& m, double lo_power, double f, double snr_db);

struct SampleStream {
  std::vector<double> samples;
  double sample_rate = 0;
  double lo_power = 0;
};

struct StreamComponents {
  SampleStream shot;
  SampleStream electronic;
};

/// Streams are synthesized in the frequency domain in independent blocks of
/// at most 2^22 samples. Each call is a fresh measurement: the random
/// streams are keyed by (rng_seed, component, lo_power, block).
SampleStream generate_vacuum_stream(const DetectorModel& m, double lo_power, std::size_t n_samples);
StreamComponents generate_vacuum_components(const DetectorModel& m, double lo_power, std::size_t n_samples);

struct TonePair {
  SampleStream single_pd;
  SampleStream balanced;
};

/// Intensity-modulation tone seen by one photodiode alone and by the
/// balanced pair. Both share the same noise realization.
TonePair generate_cm_tone_streams(const DetectorModel& m, double lo_power, double tone_freq, double tone_depth,
                                  std::size_t n_samples);

struct SpectrumEstimate {
  std::vector<double> frequencies;  // bin centres, 0 .. sample_rate / 2
  std::vector<double> psd_db;       // 10 log10(V^2/Hz)
  double resolution_bw = 0;         // bin spacing
  std::size_t segments = 0;
};

/// Averaged periodogram: periodic Hann window, 50% overlap, one-sided. The
/// mean of each segment is removed before windowing and its power is put
/// back into bin 0, so a constant stream has all its power at DC.
SpectrumEstimate estimate_spectrum(const SampleStream& s, std::size_t segment_len);

/// psd_db median-smoothed over 5 bins (truncated at the edges).
std::vector<double> smoothed_psd_db(const SpectrumEstimate& s);

/// Difference of smoothed PSDs at the bin nearest f.
double measure_snr_spectrum(const SpectrumEstimate& sig, const SpectrumEstimate& noise, double f);

/// Half the peak-to-peak spread of the smoothed PSD within [lo, hi].
double measure_band_flatness(const SpectrumEstimate& s, double lo, double hi);

/// First frequency above ref_freq where the smoothed PSD is 3 dB below its
/// value at ref_freq, linearly interpolated between bins. nullopt when the
/// PSD never drops that far.
std::optional<double> measure_bandwidth(const SpectrumEstimate& s, double ref_freq);

/// Tone power in single_pd minus tone power in balanced, dB. Tone power is
/// integrated over +-3 bins after subtracting the local noise floor.
double measure_cmrr(const SpectrumEstimate& single_pd, const SpectrumEstimate& balanced, double tone_freq);

/// 10 log10 of the mean linear PSD over [lo, hi].
double band_mean_psd_db(const SpectrumEstimate& s, double lo, double hi);

/// (PSD at the tone bin - local floor mean) / local floor std, linear units.
double tone_zscore(const SpectrumEstimate& s, double tone_freq);

/// "frequency_hz,psd_db" CSV.
std::string spectrum_csv(const SpectrumEstimate& s);

/// Little-endian float32 samples plus a JSON sidecar `<path>.json` holding
/// sample_rate, lo_power and seed.
void write_stream_f32(const std::filesystem::path& path, const SampleStream& s, std::uint64_t seed);
SampleStream read_stream_f32(const std::filesystem::path& path);

}  // namespace bhd::homodyne
