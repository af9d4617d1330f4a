#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bhd/app/config.hpp"
#include "bhd/bits.hpp"
#include "bhd/quantization_entropy.hpp"
#include "bhd/stat_tests.hpp"
#include "bhd/toeplitz_extractor.hpp"

namespace bhd::app {

struct NoiseMeasurement {
  double sigma_total = 0;  // at the LO power
  double sigma_e = 0;      // LO off
  double sigma_q = 0;      // sqrt(sigma_total^2 - sigma_e^2)
};

/// Detector model re-targeted to the ADC sample rate.
homodyne::DetectorModel acquisition_model(const RunConfig& cfg);

/// Estimates the classical and quantum noise from a dark stream (LO off)
/// and a stream at the configured LO power.
NoiseMeasurement measure_noise(const RunConfig& cfg);

entropy::AdcConfig adc_for(const RunConfig& cfg, const NoiseMeasurement& noise);
entropy::NoisePartition partition_for(const RunConfig& cfg, const NoiseMeasurement& noise);

/// Samples and quantizes `n` vacuum samples in chunks, so memory stays
/// bounded by the code array.
entropy::QuantizedStream acquire_codes(const RunConfig& cfg, const entropy::AdcConfig& adc, std::size_t n);

extract::SizingMode sizing_mode_for(design::Mode mode);

/// One extractor per channel; seeds from extractor.seed_file when set,
/// otherwise expanded from rng_seed.
std::vector<extract::ToeplitzExtractor> build_extractors(const RunConfig& cfg, std::size_t m_out);

/// Channel outputs merged back into global block order.
BitVector merge_blocks(const extract::StreamResult& r, std::size_t m_out);

struct PipelineResult {
  NoiseMeasurement noise;
  entropy::NoisePartition partition;
  entropy::AdcConfig adc;
  entropy::EntropyReport entropy;
  extract::SizingMode sizing_mode = extract::SizingMode::paper_literal_log10;
  double h_min_per_bit = 0;
  std::size_t n_in = 0;
  std::size_t m_out = 0;
  double effective_rate_bps = 0;
  std::size_t samples = 0;
  std::vector<std::string> seed_digests;
  std::size_t blocks = 0;
  std::size_t discarded_bits = 0;
  BitVector bits;
  std::optional<stats::SuiteReport> suite;
  std::vector<std::string> warnings;
  std::map<std::string, double> seconds;
};

/// simulate -> quantize -> entropy -> size -> extract -> test.
PipelineResult run_pipeline(const RunConfig& cfg);

nlohmann::json pipeline_report(const PipelineResult& r);

/// Writes extracted.bin (+ sidecar) and suite.csv into `dir`.
void write_pipeline_artifacts(const PipelineResult& r, const RunConfig& cfg, const std::filesystem::path& dir);

nlohmann::json entropy_json(const entropy::EntropyReport& e);
nlohmann::json suite_json(const stats::SuiteReport& s);

}  // namespace bhd::app
