#include "bhd/app/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "bhd/app/pipeline.hpp"
#include "bhd/detector_design.hpp"
#include "bhd/error.hpp"
#include "bhd/homodyne_sim.hpp"
#include "bhd/quantization_entropy.hpp"
#include "bhd/random.hpp"
#include "bhd/rf_network.hpp"
#include "bhd/rf_optimize.hpp"
#include "bhd/stat_tests.hpp"
#include "bhd/toeplitz_extractor.hpp"
#include "bhd/tomography.hpp"

namespace bhd::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Context {
  const RunConfig& cfg;
  fs::path dir;
  json timing = json::object();

  void write(const std::string& name, const std::string& text) const {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << text;
  }
};

json design_snr(Context& ctx) {
  const auto& d = ctx.cfg.design;
  const double snr = design::shot_noise_limited_snr(d.photodiode, d.environment);
  json catalog = json::array();
  for (const auto& pd : design::photodiode_catalog())
    catalog.push_back({{"photodiode", pd.label}, {"snr_db", design::shot_noise_limited_snr(pd, d.environment)}});
  return {{"photodiode", d.photodiode.label},
          {"temperature", d.environment.temperature},
          {"optical_power", d.environment.optical_power},
          {"snr_db", snr},
          {"snr_db_2dp", design::round_half_even(snr, 2)},
          {"catalog", catalog}};
}

json design_cascade(Context& ctx) {
  const auto& d = ctx.cfg.design;
  const auto chain = design::detector_chain(d.photodiode, d.environment, d.stage1, d.stage2, ctx.cfg.mode);
  json table = json::array();
  std::ostringstream csv;
  csv.precision(10);
  csv << "amplifier,nf_paper_literal_db,nf_standard_db,output_snr_paper_literal_db,output_snr_standard_db\n";
  for (const auto& a : design::amplifier_catalog()) {
    using design::Mode;
    const double nf_lit = design::cascade_noise_figure(a, a, Mode::paper_literal);
    const double nf_std = design::cascade_noise_figure(a, a, Mode::standard);
    const double out_lit = design::detector_chain(d.photodiode, d.environment, a, a, Mode::paper_literal).value_db;
    const double out_std = design::detector_chain(d.photodiode, d.environment, a, a, Mode::standard).value_db;
    table.push_back({{"amplifier", a.label},
                     {"nf_paper_literal_db", nf_lit},
                     {"nf_standard_db", nf_std},
                     {"output_snr_paper_literal_db", out_lit},
                     {"output_snr_standard_db", out_std}});
    csv << a.label << ',' << nf_lit << ',' << nf_std << ',' << out_lit << ',' << out_std << '\n';
  }
  ctx.write("design_cascade.csv", csv.str());
  return {{"photodiode", d.photodiode.label},
          {"stage1", d.stage1.label},
          {"stage2", d.stage2.label},
          {"noise_figure_db", design::cascade_noise_figure(d.stage1, d.stage2, ctx.cfg.mode)},
          {"output_snr_db", chain.value_db},
          {"inputs", chain.inputs_echo},
          {"catalog", table}};
}

rf::TwoPortNetwork configured_network(const RunConfig& cfg, std::string& source) {
  if (!cfg.network.touchstone.empty()) {
    source = cfg.network.touchstone;
    return rf::read_touchstone(cfg.resolve(cfg.network.touchstone));
  }
  source = "elements";
  return rf::evaluate_chain(cfg.network.topology(), cfg.network.sweep(), cfg.network.z_ref);
}

json stability(Context& ctx) {
  std::string source;
  const auto net = configured_network(ctx.cfg, source);
  const auto rep = rf::stability_factors(net);
  ctx.write("stability.csv", rf::stability_csv(rep));
  ctx.write("sparams.csv", rf::sparams_csv(net));
  std::map<std::string, std::size_t> classes;
  double min_k = INFINITY, min_mu_s = INFINITY, min_mu_l = INFINITY;
  for (const auto& p : rep.points) {
    ++classes[std::string(rf::to_string(p.status))];
    min_k = std::min(min_k, p.k_factor);
    min_mu_s = std::min(min_mu_s, p.mu_source);
    min_mu_l = std::min(min_mu_l, p.mu_load);
  }
  auto finite = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"source", source},
          {"points", rep.points.size()},
          {"stable_everywhere", rep.stable_everywhere},
          {"min_k", finite(min_k)},
          {"min_mu_source", finite(min_mu_s)},
          {"min_mu_load", finite(min_mu_l)},
          {"classes", classes}};
}

json sensitivity(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto ranked = rf::sensitivity_analysis(c.network.topology(), c.network.sweep(), c.network.z_ref,
                                               c.sensitivity.param, c.sensitivity.rel_step, c.sensitivity.band);
  json rows = json::array();
  for (const auto& s : ranked)
    rows.push_back({{"index", s.index},
                    {"label", s.label},
                    {"sensitivity_db_per_ln", s.sensitivity},
                    {"tunable", s.tunable},
                    {"clamped", s.clamped}});
  return {{"param", rf::to_string(c.sensitivity.param)}, {"rel_step", c.sensitivity.rel_step}, {"ranking", rows}};
}

json optimize(Context& ctx) {
  const auto& c = ctx.cfg;
  rf::GaConfig ga = c.ga;
  ga.rng_seed = c.rng_seed;
  ga.workers = c.workers;
  const auto sweep = c.network.sweep();
  const auto res = rf::optimize_ga(c.network.topology(), c.goals, ga, sweep, c.network.z_ref);
  ctx.write("cost_trace.csv", rf::cost_trace_csv(res.cost_trace));
  ctx.write("sparams_optimized.csv", rf::sparams_csv(rf::evaluate_chain(res.topology, sweep, c.network.z_ref)));
  json elements = json::array();
  for (const auto& e : res.topology)
    elements.push_back({{"label", e.label}, {"kind", rf::to_string(e.kind)}, {"value", e.value}});
  return {{"cost", res.cost},
          {"goals_met", res.cost == 0.0},
          {"generations_run", res.cost_trace.size() - 1},
          {"elements", elements}};
}

json simulate(Context& ctx) {
  const auto& s = ctx.cfg.simulation;
  homodyne::DetectorModel m = s.model;
  m.rng_seed = derive_key(ctx.cfg.rng_seed, 0x51D);
  const auto lit = homodyne::generate_vacuum_stream(m, s.lo_power, s.samples);
  const auto doubled = homodyne::generate_vacuum_stream(m, 2.0 * s.lo_power, s.samples);
  const auto dark = homodyne::generate_vacuum_stream(m, 0.0, s.samples);
  const auto spec_lit = homodyne::estimate_spectrum(lit, s.segment);
  const auto spec_doubled = homodyne::estimate_spectrum(doubled, s.segment);
  const auto spec_dark = homodyne::estimate_spectrum(dark, s.segment);
  ctx.write("spectrum_lo.csv", homodyne::spectrum_csv(spec_lit));
  ctx.write("spectrum_dark.csv", homodyne::spectrum_csv(spec_dark));
  if (s.write_stream) homodyne::write_stream_f32(ctx.dir / "stream.f32", lit, ctx.cfg.rng_seed);

  const double nyq = m.sample_rate / 2;
  const double lo = 0.1 * nyq, hi = 0.4 * nyq;
  json result = {
      {"samples", s.samples},
      {"segments", spec_lit.segments},
      {"resolution_bw", spec_lit.resolution_bw},
      {"shot_to_elec_db", homodyne::measure_snr_spectrum(spec_lit, spec_dark, std::min(s.snr_freq, nyq))},
      {"snr_freq", std::min(s.snr_freq, nyq)},
      {"power_doubling_db",
       homodyne::band_mean_psd_db(spec_doubled, lo, hi) - homodyne::band_mean_psd_db(spec_lit, lo, hi)},
  };
  const auto bw = homodyne::measure_bandwidth(spec_lit, 10.0 * spec_lit.resolution_bw);
  result["bandwidth_3db"] = bw ? json(*bw) : json(nullptr);
  if (m.ripple_band_hi <= nyq)
    result["ripple_flatness_db"] = homodyne::measure_band_flatness(spec_lit, m.ripple_band_lo, m.ripple_band_hi);
  if (s.tone_freq > 0) {
    const auto pair = homodyne::generate_cm_tone_streams(m, s.lo_power, s.tone_freq, s.tone_depth, s.samples);
    // A perfectly balanced pair leaves no measurable residual; report why
    // instead of failing the whole command.
    try {
      result["cmrr_db"] = homodyne::measure_cmrr(homodyne::estimate_spectrum(pair.single_pd, s.segment),
                                                 homodyne::estimate_spectrum(pair.balanced, s.segment), s.tone_freq);
    } catch (const MeasurementError& e) {
      result["cmrr_db"] = nullptr;
      result["cmrr_error"] = e.what();
    }
  }
  return result;
}

json entropy_cmd(Context& ctx) {
  const auto noise = measure_noise(ctx.cfg);
  const auto adc = adc_for(ctx.cfg, noise);
  const auto np = partition_for(ctx.cfg, noise);
  const auto codes = acquire_codes(ctx.cfg, adc, ctx.cfg.simulation.samples);
  if (adc.bits <= 8) {
    const auto packed = entropy::pack_codes(codes.codes, adc.bits);
    ctx.write("codes.bin", std::string(packed.begin(), packed.end()));
  }
  return {{"noise", {{"sigma_total", noise.sigma_total}, {"sigma_e", noise.sigma_e}, {"sigma_q", noise.sigma_q}, {"e_max", np.e_max}}},
          {"adc", {{"bits", adc.bits}, {"half_range", adc.half_range}, {"bin_width", adc.bin_width()}, {"sample_rate", ctx.cfg.adc.sample_rate}}},
          {"sigma_q_over_delta", noise.sigma_q / adc.bin_width()},
          {"entropy", entropy_json(entropy::make_report(codes, np, adc))}};
}

json extract_cmd(Context& ctx) {
  const auto& c = ctx.cfg;
  BitVector input;
  double h_per_bit = 0;
  json source;
  if (!c.extractor.input.empty()) {
    if (!c.extractor.h_min_per_bit)
      throw ValidationError({"extractor.h_min_per_bit: required when extractor.input is set"});
    input = read_bits_raw(c.resolve(c.extractor.input));
    h_per_bit = *c.extractor.h_min_per_bit;
    source = c.extractor.input;
  } else {
    const auto noise = measure_noise(c);
    const auto adc = adc_for(c, noise);
    const auto bound = entropy::conditional_min_entropy(partition_for(c, noise), adc);
    h_per_bit = c.extractor.h_min_per_bit.value_or(std::min(bound.h, double(adc.bits)) / adc.bits);
    for (auto code : acquire_codes(c, adc, c.simulation.samples).codes) input.append_bits(code, adc.bits);
    source = "simulation";
  }
  const auto mode = sizing_mode_for(c.mode);
  const std::size_t m = extract::size_output(c.extractor.n_in, h_per_bit, c.extractor.epsilon_hash, mode);
  const auto extractors = build_extractors(c, m);
  const auto res = extract::extract_bits(input, extractors, c.workers);
  const auto merged = merge_blocks(res, m);
  extract::write_bit_file(ctx.dir / "extracted.bin", merged, extractors.front(), res.blocks);

  if (c.extractor.bench_blocks > 0) {
    const auto b = extract::throughput_bench(extractors.front(), c.extractor.bench_blocks, c.workers, c.rng_seed);
    ctx.timing["bench"] = {{"input_bits", b.input_bits},
                           {"output_bits", b.output_bits},
                           {"seconds_single", b.seconds_single},
                           {"seconds_parallel", b.seconds_parallel},
                           {"workers", b.workers},
                           {"output_bits_per_second_single", b.bits_per_second_single},
                           {"speedup", b.speedup}};
  }
  json seeds = json::array();
  for (const auto& e : extractors) seeds.push_back(e.seed_digest());
  return {{"source", source},
          {"sizing_mode", extract::to_string(mode)},
          {"h_min_per_bit", h_per_bit},
          {"n_in", c.extractor.n_in},
          {"m_out", m},
          {"efficiency", double(m) / double(c.extractor.n_in)},
          {"channels", c.extractor.channels},
          {"input_bits", res.input_bits},
          {"blocks", res.blocks},
          {"discarded_bits", res.discarded_bits},
          {"output_bits", merged.size()},
          {"seed_sha256", seeds},
          {"warnings", res.warnings}};
}

json husimi(Context& ctx) {
  const auto& t = ctx.cfg.tomography;
  tomo::HeterodyneModel m = t.model;
  m.rng_seed = derive_key(ctx.cfg.rng_seed, 0x70);
  std::vector<tomo::QuadratureStream> streams;
  std::ostringstream cal;
  cal.precision(12);
  cal << "lo_power_w,var_p,var_q\n";
  for (double p : tomo::calibration_powers()) {
    streams.push_back(tomo::generate_heterodyne_stream(m, p, t.samples));
    cal << p << ',' << tomo::sample_variance(streams.back().p) << ',' << tomo::sample_variance(streams.back().q) << '\n';
  }
  ctx.write("calibration.csv", cal.str());
  const auto fit = tomo::calibrate_shot_noise(streams);

  // Vacuum measurement with the electronic noise removed: the calibrated
  // shot-noise part alone, as the normalization assumes.
  tomo::HeterodyneModel shot = m;
  shot.intercept_p = shot.intercept_q = 0;
  const auto s = tomo::generate_heterodyne_stream(shot, t.at_power, t.samples);
  const auto pts = tomo::normalize_quadratures(s, fit, t.at_power);
  const auto measured = tomo::reconstruct_husimi(pts, t.grid);
  const auto theory = tomo::theoretical_vacuum_husimi(t.grid);
  ctx.write("husimi_measured.csv", tomo::husimi_csv(measured));
  ctx.write("husimi_theory.csv", tomo::husimi_csv(theory));
  auto line = [](const tomo::LineFit& f) {
    return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
  };
  return {{"calibration", {{"p", line(fit.p)}, {"q", line(fit.q)}}},
          {"normalized_variance", {{"re", pts.var_re}, {"im", pts.var_im}}},
          {"degenerate", pts.degenerate},
          {"points", measured.points},
          {"outside", measured.outside},
          {"in_grid_mass", measured.mass()},
          {"overlap", tomo::compare_husimi(measured, theory)},
          {"warnings", measured.warnings}};
}

json test_cmd(Context& ctx) {
  const auto& c = ctx.cfg;
  if (c.tests.input.empty()) throw ValidationError({"tests.input: a bit file is required"});
  const auto bits = read_bits_raw(c.resolve(c.tests.input));
  const auto seqs = stats::split_sequences(bits, c.tests.sequence_bits, c.tests.sequences);
  const auto rep = stats::run_suite(seqs, c.tests.params, c.workers);
  ctx.write("suite.csv", stats::suite_csv(rep));
  return {{"input", c.tests.input}, {"input_bits", bits.size()}, {"suite", suite_json(rep)}};
}

json pipeline(Context& ctx) {
  const auto r = run_pipeline(ctx.cfg);
  write_pipeline_artifacts(r, ctx.cfg, ctx.dir);
  for (const auto& [stage, sec] : r.seconds) ctx.timing["stages"][stage] = sec;
  json rep = pipeline_report(r);
  rep["files"] = {{"bits", "extracted.bin"}, {"suite_csv", r.suite ? json("suite.csv") : json(nullptr)}};
  return rep;
}

using Handler = std::function<json(Context&)>;

const std::vector<std::pair<CommandInfo, Handler>>& registry() {
  static const std::vector<std::pair<CommandInfo, Handler>> r = {
      {{"design-snr", "shot-noise-limited SNR of the configured photodiode"}, design_snr},
      {{"design-cascade", "two-stage noise figure and detector output SNR"}, design_cascade},
      {{"stability", "K and mu stability factors of the network"}, stability},
      {{"sensitivity", "element log-sensitivity ranking"}, sensitivity},
      {{"optimize", "genetic optimization of the tunable elements"}, optimize},
      {{"simulate", "homodyne noise streams and spectral checks"}, simulate},
      {{"entropy", "ADC quantization and min-entropy report"}, entropy_cmd},
      {{"extract", "Toeplitz extraction to a packed bit file"}, extract_cmd},
      {{"husimi", "shot-noise calibration and vacuum Husimi reconstruction"}, husimi},
      {{"test", "statistical test suite on a bit file"}, test_cmd},
      {{"pipeline", "simulate, quantize, size, extract and test end to end"}, pipeline},
  };
  return r;
}

}  // namespace

const std::vector<CommandInfo>& command_list() {
  static const std::vector<CommandInfo> list = [] {
    std::vector<CommandInfo> v;
    for (const auto& [info, fn] : registry()) v.push_back(info);
    return v;
  }();
  return list;
}

json run_command(std::string_view name, const RunConfig& cfg) {
  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return e.first.name == name; });
  if (it == reg.end()) throw DomainError("unknown command '" + std::string(name) + "'");
  validate(cfg);
  fs::create_directories(cfg.output_dir);
  Context ctx{cfg, cfg.output_dir};
  const auto t0 = std::chrono::steady_clock::now();
  json result = it->second(ctx);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json report = {{"command", std::string(name)},
                 {"config_sha256", config_digest(cfg)},
                 {"mode", design::to_string(cfg.mode)},
                 {"rng_seed", cfg.rng_seed},
                 {"result", std::move(result)}};
  const std::string stem(name);
  ctx.write(stem + ".json", report.dump(2) + "\n");
  ctx.timing["command"] = stem;
  ctx.timing["workers"] = cfg.workers;
  ctx.timing["seconds"] = seconds;
  ctx.write(stem + ".timing.json", ctx.timing.dump(2) + "\n");
  return report;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return 3;
  if (dynamic_cast<const ParseError*>(&e)) return 4;
  if (dynamic_cast<const DomainError*>(&e)) return 5;
  if (dynamic_cast<const SizingError*>(&e)) return 6;
  if (dynamic_cast<const CalibrationError*>(&e)) return 7;
  if (dynamic_cast<const MeasurementError*>(&e)) return 8;
  if (dynamic_cast<const ApplicabilityError*>(&e)) return 9;
  if (dynamic_cast<const SingularityError*>(&e)) return 10;
  if (dynamic_cast<const Error*>(&e)) return 11;
  return 1;
}

}  // namespace bhd::app
