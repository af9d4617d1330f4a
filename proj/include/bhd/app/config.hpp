#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bhd/detector_design.hpp"
#include "bhd/homodyne_sim.hpp"
#include "bhd/rf_network.hpp"
#include "bhd/rf_optimize.hpp"
#include "bhd/stat_tests.hpp"
#include "bhd/tomography.hpp"

namespace bhd::app {

struct DesignSection {
  design::PhotodiodeSpec photodiode;
  design::AmplifierStageSpec stage1;
  design::AmplifierStageSpec stage2;
  design::Environment environment;
};

struct ElementSource {
  rf::LumpedElement element;
  std::string touchstone;  // sparam_block only
};

struct NetworkSection {
  double z_ref = 50.0;
  double sweep_start = 0.5e9;
  double sweep_stop = 1.5e9;
  std::size_t sweep_points = 101;
  std::vector<ElementSource> elements;
  /// Device file analysed by `stability` instead of the element chain.
  std::string touchstone;

  rf::FrequencySweep sweep() const { return rf::FrequencySweep::linear(sweep_start, sweep_stop, sweep_points); }
  rf::NetworkTopology topology() const;
};

struct SensitivitySection {
  rf::SParam param = rf::SParam::S11;
  double rel_step = 0.01;
  std::optional<std::pair<double, double>> band;
};

struct SimulationSection {
  homodyne::DetectorModel model;
  std::size_t samples = 1 << 20;
  std::size_t segment = 4096;
  double lo_power = 1e-3;
  double snr_freq = 1.75e9;
  double tone_freq = 0;  // 0 = no CMRR measurement
  double tone_depth = 0.1;
  bool write_stream = false;
};

struct AdcSection {
  unsigned bits = 8;
  double sample_rate = 0.8e9;
  /// Fixed half range in V; otherwise half_range_sigmas times the measured
  /// total noise std.
  std::optional<double> half_range;
  double half_range_sigmas = 3.3;
};

struct EntropySection {
  /// e_max = excursion_k * sigma_e.
  double excursion_k = 5.0;
  std::size_t calibration_samples = 1 << 20;
};

struct ExtractorSection {
  std::size_t n_in = 2207;
  double epsilon_hash = 1e-50;
  std::size_t channels = 4;
  std::string seed_file;
  /// Used by `extract` on an external bit file; the pipeline measures it.
  std::optional<double> h_min_per_bit;
  std::string input;
  std::size_t bench_blocks = 0;
};

struct TomographySection {
  tomo::HeterodyneModel model;
  std::size_t samples = 1000000;
  double at_power = 1e-3;
  tomo::GridSpec grid;
};

struct TestSection {
  std::size_t sequence_bits = 1000000;
  std::size_t sequences = 100;
  stats::SuiteParams params;
  std::string input;
};

struct RunConfig {
  std::uint64_t rng_seed = 1;
  std::filesystem::path output_dir = "out";
  design::Mode mode = design::Mode::paper_literal;
  /// Runtime only: excluded from the digest and from reports.
  std::size_t workers = 1;

  DesignSection design;
  NetworkSection network;
  rf::GoalSet goals;
  SensitivitySection sensitivity;
  rf::GaConfig ga;
  SimulationSection simulation;
  AdcSection adc;
  EntropySection entropy;
  ExtractorSection extractor;
  TomographySection tomography;
  TestSection tests;

  /// Directory holding the config file; relative paths resolve against it.
  std::filesystem::path base_dir = ".";

  std::filesystem::path resolve(const std::string& p) const;
};

RunConfig default_config();

/// Every key is checked; all problems are collected into one
/// ValidationError that names each offending key path.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Effective configuration with defaults filled in. Leaves out
/// output_dir and workers, which do not affect results.
nlohmann::json effective_config(const RunConfig& cfg);
std::string config_digest(const RunConfig& cfg);

/// Re-runs module validation; throws ValidationError.
void validate(const RunConfig& cfg);

}  // namespace bhd::app
