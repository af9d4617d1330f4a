#include "bhd/app/config.hpp"

#include <cmath>
#include <fstream>
#include <tuple>
#include <set>
#include <sstream>

#include "bhd/digest.hpp"
#include "bhd/error.hpp"

namespace bhd::app {

using nlohmann::json;

namespace {

using Issues = std::vector<std::string>;

// Reads typed values out of one JSON object, recording every problem under
// its key path and remembering which keys were consumed.
class Reader {
public:
  Reader(const json* obj, std::string path, Issues& issues) : obj_(obj), path_(std::move(path)), issues_(&issues) {
    if (obj_ && !obj_->is_object()) {
      issue("", "expected an object");
      obj_ = nullptr;
    }
  }
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;
  ~Reader() {
    if (!obj_) return;
    for (const auto& [k, v] : obj_->items())
      if (!seen_.count(k)) issue(k, "unknown key");
  }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    if (!obj_) return nullptr;
    const auto it = obj_->find(key);
    return it == obj_->end() || it->is_null() ? nullptr : &*it;
  }

  Reader child(const std::string& key) { return Reader(raw(key), sub(key), *issues_); }

  void num(const std::string& key, double& out) {
    if (const json* v = raw(key)) {
      if (v->is_number())
        out = v->get<double>();
      else
        issue(key, "expected a number");
    }
  }
  void num(const std::string& key, std::optional<double>& out) {
    if (raw(key)) {
      double v = 0;
      num(key, v);
      out = v;
    }
  }
  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = raw(key)) {
      if (v->is_number_unsigned() || (v->is_number_integer() && v->get<long long>() >= 0)) {
        out = static_cast<Int>(v->get<unsigned long long>());
      } else if (v->is_number_float() && v->get<double>() >= 0 && v->get<double>() == std::floor(v->get<double>()) &&
                 v->get<double>() < 1.8e19) {
        out = static_cast<Int>(v->get<double>());
      } else {
        issue(key, "expected a non-negative integer");
      }
    }
  }
  void str(const std::string& key, std::string& out) {
    if (const json* v = raw(key)) {
      if (v->is_string())
        out = v->get<std::string>();
      else
        issue(key, "expected a string");
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = raw(key)) {
      if (v->is_boolean())
        out = v->get<bool>();
      else
        issue(key, "expected true or false");
    }
  }
  template <typename Fn>
  void parsed(const std::string& key, Fn&& fn) {
    std::string text;
    if (!raw(key)) return;
    str(key, text);
    if (text.empty()) return;
    try {
      fn(text);
    } catch (const Error& e) {
      issue(key, e.what());
    }
  }

  void issue(const std::string& key, const std::string& what) const {
    issues_->push_back((key.empty() ? (path_.empty() ? "<root>" : path_) : sub(key)) + ": " + what);
  }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool present() const { return obj_ != nullptr; }
  Issues& issues() const { return *issues_; }

private:
  const json* obj_;
  std::string path_;
  Issues* issues_;
  std::set<std::string> seen_;
};

template <typename Fn>
void check(Issues& issues, const std::string& where, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    issues.push_back(where + ": " + e.what());
  }
}

void read_photodiode(Reader& parent, const std::string& key, design::PhotodiodeSpec& pd) {
  const json* v = parent.raw(key);
  if (!v) return;
  if (v->is_string()) {
    try {
      pd = design::find_photodiode(v->get<std::string>());
    } catch (const Error& e) {
      parent.issue(key, e.what());
    }
    return;
  }
  Reader r(v, parent.sub(key), parent.issues());
  r.str("label", pd.label);
  r.num("responsivity", pd.responsivity);
  r.num("dark_current", pd.dark_current);
  r.num("shunt_resistance", pd.shunt_resistance);
  r.num("junction_capacitance", pd.junction_capacitance);
  r.num("bandwidth", pd.bandwidth);
}

void read_amplifier(Reader& parent, const std::string& key, design::AmplifierStageSpec& a) {
  const json* v = parent.raw(key);
  if (!v) return;
  if (v->is_string()) {
    try {
      a = design::find_amplifier(v->get<std::string>());
    } catch (const Error& e) {
      parent.issue(key, e.what());
    }
    return;
  }
  Reader r(v, parent.sub(key), parent.issues());
  r.str("label", a.label);
  r.num("gain_db", a.gain_db);
  r.num("noise_figure_db", a.noise_figure_db);
  r.num("bandwidth", a.bandwidth);
}

void read_band(Reader& r, const std::string& key, std::optional<std::pair<double, double>>& band) {
  const json* v = r.raw(key);
  if (!v) return;
  if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
    r.issue(key, "expected [lo, hi] in Hz");
    return;
  }
  band = std::pair{(*v)[0].get<double>(), (*v)[1].get<double>()};
}

void read_elements(Reader& parent, NetworkSection& net, const std::filesystem::path& base) {
  const json* v = parent.raw("elements");
  if (!v) return;
  if (!v->is_array()) {
    parent.issue("elements", "expected an array");
    return;
  }
  net.elements.clear();
  for (std::size_t i = 0; i < v->size(); ++i) {
    Reader r(&(*v)[i], parent.sub("elements") + "[" + std::to_string(i) + "]", parent.issues());
    ElementSource src;
    auto& e = src.element;
    bool kind_ok = false;
    r.parsed("kind", [&](const std::string& t) {
      e.kind = rf::parse_element_kind(t);
      kind_ok = true;
    });
    if (!r.raw("kind")) r.issue("kind", "missing");
    r.str("label", e.label);
    if (kind_ok && e.kind == rf::ElementKind::sparam_block) {
      r.str("touchstone", src.touchstone);
      if (src.touchstone.empty()) {
        r.issue("touchstone", "sparam_block needs a touchstone file");
      } else {
        try {
          const auto p = std::filesystem::path(src.touchstone).is_absolute() ? std::filesystem::path(src.touchstone)
                                                                            : base / src.touchstone;
          e.block = std::make_shared<rf::TwoPortNetwork>(rf::read_touchstone(p));
        } catch (const Error& ex) {
          r.issue("touchstone", ex.what());
        }
      }
    } else {
      r.num("value", e.value);
      e.min = e.max = e.value;
      r.num("min", e.min);
      r.num("max", e.max);
    }
    net.elements.push_back(std::move(src));
  }
}

void read_goals(Reader& root, rf::GoalSet& goals) {
  const json* v = root.raw("goals");
  if (!v) return;
  if (!v->is_array()) {
    root.issue("goals", "expected an array");
    return;
  }
  goals.clear();
  for (std::size_t i = 0; i < v->size(); ++i) {
    Reader r(&(*v)[i], "goals[" + std::to_string(i) + "]", root.issues());
    rf::Goal g;
    r.parsed("param", [&](const std::string& t) { g.param = rf::parse_sparam(t); });
    r.parsed("comparison", [&](const std::string& t) { g.comparison = rf::parse_comparison(t); });
    r.num("threshold_db", g.threshold_db);
    std::optional<std::pair<double, double>> band;
    read_band(r, "band", band);
    if (!band)
      r.issue("band", "missing");
    else
      std::tie(g.band_lo, g.band_hi) = *band;
    goals.push_back(g);
  }
}

}  // namespace

rf::NetworkTopology NetworkSection::topology() const {
  rf::NetworkTopology t;
  for (const auto& e : elements) t.push_back(e.element);
  return t;
}

std::filesystem::path RunConfig::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

RunConfig default_config() {
  RunConfig c;
  c.design.photodiode = design::find_photodiode("LSIPD-LD50");
  c.design.stage1 = design::find_amplifier("BGM1013");
  c.design.stage2 = c.design.stage1;

  // 50 ohm to 100 ohm L-match at 1 GHz.
  using rf::ElementKind;
  c.network.elements = {
      {rf::LumpedElement::tunable(ElementKind::series_inductor, 10e-9, 0.1e-9, 100e-9, "L1"), {}},
      {rf::LumpedElement::tunable(ElementKind::shunt_capacitor, 1e-12, 0.01e-12, 100e-12, "C1"), {}},
      {rf::LumpedElement::fixed(ElementKind::series_resistor, 50.0, "R_load"), {}},
  };
  c.goals = {{rf::SParam::S11, rf::Comparison::below, -10.0, 0.95e9, 1.05e9}};
  c.sensitivity.band = std::pair{0.95e9, 1.05e9};
  return c;
}

namespace {

RunConfig parse_config_with_base(const json& doc, const std::filesystem::path& base) {
  RunConfig c = default_config();
  c.base_dir = base;
  Issues issues;
  {
    Reader root(&doc, "", issues);
    root.integer("rng_seed", c.rng_seed);
    std::string out;
    root.str("output_dir", out);
    if (!out.empty()) c.output_dir = out;
    root.parsed("mode", [&](const std::string& t) { c.mode = design::parse_mode(t); });
    root.integer("workers", c.workers);

    {
      Reader r = root.child("design");
      read_photodiode(r, "photodiode", c.design.photodiode);
      read_amplifier(r, "stage1", c.design.stage1);
      c.design.stage2 = c.design.stage1;
      read_amplifier(r, "stage2", c.design.stage2);
      r.num("temperature", c.design.environment.temperature);
      r.num("optical_power", c.design.environment.optical_power);
    }
    {
      Reader r = root.child("network");
      r.num("z_ref", c.network.z_ref);
      {
        Reader s = r.child("sweep");
        s.num("start", c.network.sweep_start);
        s.num("stop", c.network.sweep_stop);
        s.integer("points", c.network.sweep_points);
      }
      read_elements(r, c.network, c.base_dir);
      r.str("touchstone", c.network.touchstone);
    }
    read_goals(root, c.goals);
    {
      Reader r = root.child("sensitivity");
      r.parsed("param", [&](const std::string& t) { c.sensitivity.param = rf::parse_sparam(t); });
      r.num("rel_step", c.sensitivity.rel_step);
      read_band(r, "band", c.sensitivity.band);
    }
    {
      Reader r = root.child("ga");
      r.integer("population", c.ga.population);
      r.integer("generations", c.ga.generations);
      r.num("mutation_rate", c.ga.mutation_rate);
      r.num("crossover_rate", c.ga.crossover_rate);
      r.num("mutation_sigma_decades", c.ga.mutation_sigma_decades);
      r.integer("tournament_size", c.ga.tournament_size);
      r.boolean("stop_when_met", c.ga.stop_when_met);
    }
    {
      Reader r = root.child("simulation");
      auto& m = c.simulation.model;
      r.num("sample_rate", m.sample_rate);
      r.num("shot_noise_psd_per_mw", m.shot_noise_psd_per_mw);
      r.num("elec_noise_psd", m.elec_noise_psd);
      r.num("f3db", m.f3db);
      r.num("ripple_db", m.ripple_db);
      r.num("ripple_period", m.ripple_period);
      r.num("ripple_band_lo", m.ripple_band_lo);
      r.num("ripple_band_hi", m.ripple_band_hi);
      r.num("saturation_power", m.saturation_power);
      r.num("pd_gain_ratio", m.pd_gain_ratio);
      r.num("cm_volts_per_mw", m.cm_volts_per_mw);
      r.num("flicker_corner", m.flicker_corner);
      r.integer("samples", c.simulation.samples);
      r.integer("segment", c.simulation.segment);
      r.num("lo_power", c.simulation.lo_power);
      r.num("snr_freq", c.simulation.snr_freq);
      r.num("tone_freq", c.simulation.tone_freq);
      r.num("tone_depth", c.simulation.tone_depth);
      r.boolean("write_stream", c.simulation.write_stream);
    }
    {
      Reader r = root.child("adc");
      r.integer("bits", c.adc.bits);
      r.num("sample_rate", c.adc.sample_rate);
      r.num("half_range", c.adc.half_range);
      r.num("half_range_sigmas", c.adc.half_range_sigmas);
    }
    {
      Reader r = root.child("entropy");
      r.num("excursion_k", c.entropy.excursion_k);
      r.integer("calibration_samples", c.entropy.calibration_samples);
    }
    {
      Reader r = root.child("extractor");
      r.integer("n_in", c.extractor.n_in);
      r.num("epsilon_hash", c.extractor.epsilon_hash);
      r.integer("channels", c.extractor.channels);
      r.str("seed_file", c.extractor.seed_file);
      r.num("h_min_per_bit", c.extractor.h_min_per_bit);
      r.str("input", c.extractor.input);
      r.integer("bench_blocks", c.extractor.bench_blocks);
    }
    {
      Reader r = root.child("tomography");
      auto& m = c.tomography.model;
      r.num("slope_p", m.slope_p);
      r.num("intercept_p", m.intercept_p);
      r.num("slope_q", m.slope_q);
      r.num("intercept_q", m.intercept_q);
      r.num("sample_rate", m.sample_rate);
      r.integer("samples", c.tomography.samples);
      r.num("at_power", c.tomography.at_power);
      Reader g = r.child("grid");
      g.integer("n", c.tomography.grid.n);
      g.num("lo", c.tomography.grid.lo);
      g.num("hi", c.tomography.grid.hi);
    }
    {
      Reader r = root.child("tests");
      r.integer("sequence_bits", c.tests.sequence_bits);
      r.integer("sequences", c.tests.sequences);
      r.integer("block_len", c.tests.params.block_len);
      r.integer("serial_m", c.tests.params.serial_m);
      r.integer("apen_m", c.tests.params.apen_m);
      r.num("alpha", c.tests.params.alpha);
      r.str("input", c.tests.input);
    }
  }
  try {
    validate(c);
  } catch (const ValidationError& e) {
    issues.insert(issues.end(), e.issues().begin(), e.issues().end());
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return c;
}

}  // namespace

RunConfig parse_config(const json& doc) { return parse_config_with_base(doc, "."); }

void validate(const RunConfig& c) {
  Issues issues;
  if (c.workers == 0) issues.push_back("workers: must be >= 1");
  check(issues, "design.photodiode", [&] { c.design.photodiode.validate(); });
  check(issues, "design.stage1", [&] { c.design.stage1.validate(); });
  check(issues, "design.stage2", [&] { c.design.stage2.validate(); });
  check(issues, "design", [&] { c.design.environment.validate(); });
  if (!(c.network.z_ref > 0)) issues.push_back("network.z_ref: must be > 0");
  check(issues, "network.sweep", [&] {
    const auto sweep = c.network.sweep();
    if (!c.goals.empty()) check(issues, "goals", [&] { rf::validate_goals(c.goals, sweep); });
  });
  for (std::size_t i = 0; i < c.network.elements.size(); ++i)
    check(issues, "network.elements[" + std::to_string(i) + "]", [&] {
      const auto& e = c.network.elements[i].element;
      if (e.kind != rf::ElementKind::sparam_block || e.block) e.validate();
    });
  if (!(c.sensitivity.rel_step > 0 && c.sensitivity.rel_step <= 0.5))
    issues.push_back("sensitivity.rel_step: must lie in (0, 0.5]");
  check(issues, "ga", [&] { c.ga.validate(); });
  check(issues, "simulation", [&] { c.simulation.model.validate(); });
  if (c.simulation.samples < 2) issues.push_back("simulation.samples: must be >= 2");
  if (c.simulation.segment < 2 || (c.simulation.segment & (c.simulation.segment - 1)))
    issues.push_back("simulation.segment: must be a power of two >= 2");
  if (!(c.simulation.lo_power > 0)) issues.push_back("simulation.lo_power: must be > 0");
  if (c.adc.bits < 1 || c.adc.bits > 16) issues.push_back("adc.bits: must lie in [1, 16]");
  if (!(c.adc.sample_rate > 0)) issues.push_back("adc.sample_rate: must be > 0");
  if (c.adc.half_range && !(*c.adc.half_range > 0)) issues.push_back("adc.half_range: must be > 0");
  if (!(c.adc.half_range_sigmas > 0)) issues.push_back("adc.half_range_sigmas: must be > 0");
  if (!(c.entropy.excursion_k >= 0)) issues.push_back("entropy.excursion_k: must be >= 0");
  if (c.entropy.calibration_samples < 2) issues.push_back("entropy.calibration_samples: must be >= 2");
  if (c.extractor.n_in == 0) issues.push_back("extractor.n_in: must be > 0");
  if (!(c.extractor.epsilon_hash > 0 && c.extractor.epsilon_hash < 1))
    issues.push_back("extractor.epsilon_hash: must lie in (0, 1)");
  if (c.extractor.channels == 0) issues.push_back("extractor.channels: must be >= 1");
  if (c.extractor.h_min_per_bit && !(*c.extractor.h_min_per_bit > 0 && *c.extractor.h_min_per_bit <= 1))
    issues.push_back("extractor.h_min_per_bit: must lie in (0, 1]");
  check(issues, "tomography", [&] { c.tomography.model.validate(); });
  check(issues, "tomography.grid", [&] { c.tomography.grid.validate(); });
  if (c.tomography.samples < 2) issues.push_back("tomography.samples: must be >= 2");
  if (!(c.tomography.at_power > 0)) issues.push_back("tomography.at_power: must be > 0");
  if (c.tests.sequence_bits < 100) issues.push_back("tests.sequence_bits: must be >= 100");
  if (c.tests.sequences < 10) issues.push_back("tests.sequences: must be >= 10");
  if (!(c.tests.params.alpha > 0 && c.tests.params.alpha < 1)) issues.push_back("tests.alpha: must lie in (0, 1)");
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), 0);
  }
  return parse_config(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + " is not valid JSON: " + e.what(), 0);
  }
  return parse_config_with_base(doc, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

json effective_config(const RunConfig& c) {
  auto pd = [](const design::PhotodiodeSpec& p) {
    return json{{"label", p.label},
                {"responsivity", p.responsivity},
                {"dark_current", p.dark_current},
                {"shunt_resistance", p.shunt_resistance},
                {"junction_capacitance", p.junction_capacitance},
                {"bandwidth", p.bandwidth}};
  };
  auto amp = [](const design::AmplifierStageSpec& a) {
    return json{{"label", a.label}, {"gain_db", a.gain_db}, {"noise_figure_db", a.noise_figure_db}, {"bandwidth", a.bandwidth}};
  };
  json elements = json::array();
  for (const auto& src : c.network.elements) {
    const auto& e = src.element;
    if (e.kind == rf::ElementKind::sparam_block)
      elements.push_back({{"kind", rf::to_string(e.kind)}, {"label", e.label}, {"touchstone", src.touchstone}});
    else
      elements.push_back(
          {{"kind", rf::to_string(e.kind)}, {"label", e.label}, {"value", e.value}, {"min", e.min}, {"max", e.max}});
  }
  json goals = json::array();
  for (const auto& g : c.goals)
    goals.push_back({{"param", rf::to_string(g.param)},
                     {"comparison", rf::to_string(g.comparison)},
                     {"threshold_db", g.threshold_db},
                     {"band", {g.band_lo, g.band_hi}}});
  const auto& m = c.simulation.model;
  const auto& t = c.tomography.model;
  json j = {
      {"rng_seed", c.rng_seed},
      {"mode", design::to_string(c.mode)},
      {"design",
       {{"photodiode", pd(c.design.photodiode)},
        {"stage1", amp(c.design.stage1)},
        {"stage2", amp(c.design.stage2)},
        {"temperature", c.design.environment.temperature},
        {"optical_power", c.design.environment.optical_power}}},
      {"network",
       {{"z_ref", c.network.z_ref},
        {"sweep", {{"start", c.network.sweep_start}, {"stop", c.network.sweep_stop}, {"points", c.network.sweep_points}}},
        {"elements", elements},
        {"touchstone", c.network.touchstone}}},
      {"goals", goals},
      {"sensitivity",
       {{"param", rf::to_string(c.sensitivity.param)},
        {"rel_step", c.sensitivity.rel_step},
        {"band", c.sensitivity.band ? json{c.sensitivity.band->first, c.sensitivity.band->second} : json(nullptr)}}},
      {"ga",
       {{"population", c.ga.population},
        {"generations", c.ga.generations},
        {"mutation_rate", c.ga.mutation_rate},
        {"crossover_rate", c.ga.crossover_rate},
        {"mutation_sigma_decades", c.ga.mutation_sigma_decades},
        {"tournament_size", c.ga.tournament_size},
        {"stop_when_met", c.ga.stop_when_met}}},
      {"simulation",
       {{"sample_rate", m.sample_rate},
        {"shot_noise_psd_per_mw", m.shot_noise_psd_per_mw},
        {"elec_noise_psd", m.elec_noise_psd},
        {"f3db", m.f3db},
        {"ripple_db", m.ripple_db},
        {"ripple_period", m.ripple_period},
        {"ripple_band_lo", m.ripple_band_lo},
        {"ripple_band_hi", m.ripple_band_hi},
        {"saturation_power", m.saturation_power},
        {"pd_gain_ratio", m.pd_gain_ratio},
        {"cm_volts_per_mw", m.cm_volts_per_mw},
        {"flicker_corner", m.flicker_corner},
        {"samples", c.simulation.samples},
        {"segment", c.simulation.segment},
        {"lo_power", c.simulation.lo_power},
        {"snr_freq", c.simulation.snr_freq},
        {"tone_freq", c.simulation.tone_freq},
        {"tone_depth", c.simulation.tone_depth},
        {"write_stream", c.simulation.write_stream}}},
      {"adc",
       {{"bits", c.adc.bits},
        {"sample_rate", c.adc.sample_rate},
        {"half_range", c.adc.half_range ? json(*c.adc.half_range) : json(nullptr)},
        {"half_range_sigmas", c.adc.half_range_sigmas}}},
      {"entropy", {{"excursion_k", c.entropy.excursion_k}, {"calibration_samples", c.entropy.calibration_samples}}},
      {"extractor",
       {{"n_in", c.extractor.n_in},
        {"epsilon_hash", c.extractor.epsilon_hash},
        {"channels", c.extractor.channels},
        {"seed_file", c.extractor.seed_file},
        {"h_min_per_bit", c.extractor.h_min_per_bit ? json(*c.extractor.h_min_per_bit) : json(nullptr)},
        {"input", c.extractor.input},
        {"bench_blocks", c.extractor.bench_blocks}}},
      {"tomography",
       {{"slope_p", t.slope_p},
        {"intercept_p", t.intercept_p},
        {"slope_q", t.slope_q},
        {"intercept_q", t.intercept_q},
        {"sample_rate", t.sample_rate},
        {"samples", c.tomography.samples},
        {"at_power", c.tomography.at_power},
        {"grid", {{"n", c.tomography.grid.n}, {"lo", c.tomography.grid.lo}, {"hi", c.tomography.grid.hi}}}}},
      {"tests",
       {{"sequence_bits", c.tests.sequence_bits},
        {"sequences", c.tests.sequences},
        {"block_len", c.tests.params.block_len},
        {"serial_m", c.tests.params.serial_m},
        {"apen_m", c.tests.params.apen_m},
        {"alpha", c.tests.params.alpha},
        {"input", c.tests.input}}},
  };
  return j;
}

std::string config_digest(const RunConfig& cfg) { return sha256_hex(effective_config(cfg).dump()); }

}  // namespace bhd::app
