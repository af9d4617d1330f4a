#include "bhd/app/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "bhd/digest.hpp"
#include "bhd/error.hpp"
#include "bhd/homodyne_sim.hpp"
#include "bhd/random.hpp"
#include "bhd/tomography.hpp"

namespace bhd::app {

using nlohmann::json;

namespace {

constexpr std::uint64_t kCalibrationStream = 0xCA1;
constexpr std::uint64_t kAcquisitionStream = 0xAC0;
constexpr std::size_t kChunk = std::size_t{1} << 22;

class Stopwatch {
public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

homodyne::DetectorModel acquisition_model(const RunConfig& cfg) {
  homodyne::DetectorModel m = cfg.simulation.model;
  m.sample_rate = cfg.adc.sample_rate;
  return m;
}

NoiseMeasurement measure_noise(const RunConfig& cfg) {
  homodyne::DetectorModel m = acquisition_model(cfg);
  m.rng_seed = derive_key(cfg.rng_seed, kCalibrationStream);
  const std::size_t n = cfg.entropy.calibration_samples;
  const auto dark = homodyne::generate_vacuum_stream(m, 0.0, n);
  const auto lit = homodyne::generate_vacuum_stream(m, cfg.simulation.lo_power, n);
  const double var_e = tomo::sample_variance(dark.samples);
  const double var_t = tomo::sample_variance(lit.samples);
  if (!(var_t > var_e)) throw MeasurementError("LO-on noise does not exceed the dark noise; no quantum noise to extract");
  return {std::sqrt(var_t), std::sqrt(var_e), std::sqrt(var_t - var_e)};
}

entropy::AdcConfig adc_for(const RunConfig& cfg, const NoiseMeasurement& noise) {
  entropy::AdcConfig adc{cfg.adc.bits, cfg.adc.half_range.value_or(cfg.adc.half_range_sigmas * noise.sigma_total)};
  adc.validate();
  return adc;
}

entropy::NoisePartition partition_for(const RunConfig& cfg, const NoiseMeasurement& noise) {
  return entropy::NoisePartition::from_classical(noise.sigma_q, noise.sigma_e, cfg.entropy.excursion_k);
}

entropy::QuantizedStream acquire_codes(const RunConfig& cfg, const entropy::AdcConfig& adc, std::size_t n) {
  homodyne::DetectorModel m = acquisition_model(cfg);
  entropy::QuantizedStream out;
  out.bits = adc.bits;
  out.codes.reserve(n);
  for (std::size_t chunk = 0, done = 0; done < n; ++chunk) {
    const std::size_t len = std::min(kChunk, n - done);
    m.rng_seed = derive_key(cfg.rng_seed, kAcquisitionStream, chunk);
    const auto s = homodyne::generate_vacuum_stream(m, cfg.simulation.lo_power, len);
    auto q = entropy::quantize(s.samples, adc);
    out.codes.insert(out.codes.end(), q.codes.begin(), q.codes.end());
    out.saturated_low += q.saturated_low;
    out.saturated_high += q.saturated_high;
    done += len;
  }
  return out;
}

extract::SizingMode sizing_mode_for(design::Mode mode) {
  return mode == design::Mode::paper_literal ? extract::SizingMode::paper_literal_log10
                                             : extract::SizingMode::standard_log2;
}

std::vector<extract::ToeplitzExtractor> build_extractors(const RunConfig& cfg, std::size_t m_out) {
  const std::size_t n = cfg.extractor.n_in;
  const std::size_t len = n + m_out - 1;
  std::vector<extract::ToeplitzExtractor> out;
  if (!cfg.extractor.seed_file.empty()) {
    // Consecutive seed windows of the file, one per channel.
    const auto whole =
        extract::ToeplitzSeed::from_file(cfg.resolve(cfg.extractor.seed_file), len * cfg.extractor.channels);
    for (std::size_t c = 0; c < cfg.extractor.channels; ++c)
      out.emplace_back(extract::ToeplitzSeed{whole.bits.slice(c * len, len), std::nullopt}, n, m_out);
  } else {
    for (std::size_t c = 0; c < cfg.extractor.channels; ++c)
      out.emplace_back(extract::ToeplitzSeed::from_u64(cfg.rng_seed, len, c), n, m_out);
  }
  return out;
}

BitVector merge_blocks(const extract::StreamResult& r, std::size_t m_out) {
  BitVector out;
  const std::size_t channels = r.channel_outputs.size();
  for (std::size_t b = 0; b < r.blocks; ++b)
    out.append(r.channel_outputs[b % channels].slice((b / channels) * m_out, m_out));
  return out;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  validate(cfg);
  PipelineResult r;
  Stopwatch clock;

  r.noise = measure_noise(cfg);
  r.adc = adc_for(cfg, r.noise);
  r.partition = partition_for(cfg, r.noise);
  const auto bound = entropy::conditional_min_entropy(r.partition, r.adc);
  if (!bound.safe) r.warnings.push_back("c1 > c2: saturated end bin dominates the min-entropy bound");
  r.seconds["calibrate"] = clock.lap();

  r.sizing_mode = sizing_mode_for(cfg.mode);
  r.n_in = cfg.extractor.n_in;
  r.h_min_per_bit = std::min(bound.h, static_cast<double>(r.adc.bits)) / r.adc.bits;
  r.m_out = extract::size_output(r.n_in, r.h_min_per_bit, cfg.extractor.epsilon_hash, r.sizing_mode);
  r.effective_rate_bps =
      extract::effective_rate_bps(cfg.extractor.channels, cfg.adc.sample_rate, r.adc.bits, r.m_out, r.n_in);

  // Enough samples for the requested test batch.
  const std::size_t want_bits = cfg.tests.sequences * cfg.tests.sequence_bits;
  const std::size_t blocks = (want_bits + r.m_out - 1) / r.m_out;
  r.samples = (blocks * r.n_in + r.adc.bits - 1) / r.adc.bits;

  const auto codes = acquire_codes(cfg, r.adc, r.samples);
  r.entropy = entropy::make_report(codes, r.partition, r.adc);
  r.seconds["acquire"] = clock.lap();

  const auto extractors = build_extractors(cfg, r.m_out);
  for (const auto& e : extractors) r.seed_digests.push_back(e.seed_digest());
  const auto stream = extract::extract_stream(codes.codes, r.adc.bits, extractors, cfg.workers);
  r.blocks = stream.blocks;
  r.discarded_bits = stream.discarded_bits;
  for (const auto& w : stream.warnings) r.warnings.push_back(w);
  r.bits = merge_blocks(stream, r.m_out);
  r.seconds["extract"] = clock.lap();

  const auto sequences = stats::split_sequences(r.bits, cfg.tests.sequence_bits, cfg.tests.sequences);
  if (sequences.size() < cfg.tests.sequences)
    r.warnings.push_back("only " + std::to_string(sequences.size()) + " test sequences available");
  if (sequences.size() >= 10) r.suite = stats::run_suite(sequences, cfg.tests.params, cfg.workers);
  r.seconds["test"] = clock.lap();
  return r;
}

json entropy_json(const entropy::EntropyReport& e) {
  return {{"h_min_empirical", e.h_min_empirical},
          {"h_min_conditional", e.h_min_conditional},
          {"h_min_conditional_uncapped", e.h_min_conditional_raw},
          {"c1", e.c1},
          {"c2", e.c2},
          {"safe", e.safe},
          {"qcnr_db", e.qcnr.infinite ? json("inf") : json(e.qcnr.db)},
          {"samples", e.samples},
          {"saturated_low", e.saturated_low},
          {"saturated_high", e.saturated_high}};
}

json suite_json(const stats::SuiteReport& s) {
  json rows = json::array();
  for (const auto& row : s.rows)
    rows.push_back({{"test", row.test_name},
                    {"passed", row.passed},
                    {"total", row.total},
                    {"proportion", row.proportion},
                    {"within_ci", row.within_ci},
                    {"uniformity_p", row.uniformity_p}});
  return {{"sequences", s.sequences},
          {"bits_per_sequence", s.bits_per_sequence},
          {"alpha", s.alpha},
          {"ci_low", s.ci_low},
          {"ci_high", s.ci_high},
          {"all_pass", s.all_pass},
          {"tests", rows}};
}

json pipeline_report(const PipelineResult& r) {
  return {
      {"noise",
       {{"sigma_total", r.noise.sigma_total},
        {"sigma_e", r.noise.sigma_e},
        {"sigma_q", r.noise.sigma_q},
        {"e_max", r.partition.e_max}}},
      {"adc", {{"bits", r.adc.bits}, {"half_range", r.adc.half_range}, {"bin_width", r.adc.bin_width()}}},
      {"entropy", entropy_json(r.entropy)},
      {"sizing",
       {{"mode", extract::to_string(r.sizing_mode)},
        {"h_min_per_bit", r.h_min_per_bit},
        {"n_in", r.n_in},
        {"m_out", r.m_out},
        {"efficiency", static_cast<double>(r.m_out) / static_cast<double>(r.n_in)},
        {"effective_rate_bps", r.effective_rate_bps}}},
      {"extraction",
       {{"samples", r.samples},
        {"blocks", r.blocks},
        {"discarded_bits", r.discarded_bits},
        {"output_bits", r.bits.size()},
        {"output_sha256", sha256_hex(r.bits.bytes())},
        {"seed_sha256", r.seed_digests}}},
      {"suite", r.suite ? suite_json(*r.suite) : json(nullptr)},
      {"warnings", r.warnings},
  };
}

void write_pipeline_artifacts(const PipelineResult& r, const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_bits_raw(dir / "extracted.bin", r.bits);
  json side = {{"bit_order", "msb-first"},
               {"bits", r.bits.size()},
               {"n_in", r.n_in},
               {"m_out", r.m_out},
               {"blocks", r.blocks},
               {"channels", cfg.extractor.channels},
               {"seed_sha256", r.seed_digests}};
  std::ofstream(dir / "extracted.bin.json") << side.dump(2) << '\n';
  if (r.suite) std::ofstream(dir / "suite.csv") << stats::suite_csv(*r.suite);
}

}  // namespace bhd::app
