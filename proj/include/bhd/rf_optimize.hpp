#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bhd/rf_network.hpp"

namespace bhd::rf {

enum class Comparison { below, above };
std::string_view to_string(Comparison c);
Comparison parse_comparison(std::string_view text);

/// "|param| in dB must be below/above threshold across [band_lo, band_hi]".
struct Goal {
  SParam param = SParam::S11;
  Comparison comparison = Comparison::below;
  double threshold_db = 0;
  double band_lo = 0;
  double band_hi = 0;
};

using GoalSet = std::vector<Goal>;

/// Checks each goal band lies within the sweep span.
void validate_goals(const GoalSet& goals, const FrequencySweep& sweep);

/// Sum over goals and in-band frequencies of the squared dB violation.
/// Zero iff every goal is met.
double evaluate_goals(const TwoPortNetwork& n, const GoalSet& goals);

struct ElementSensitivity {
  std::size_t index = 0;
  std::string label;
  /// d(band-mean |param| dB) / d(ln value), central difference.
  double sensitivity = 0;
  bool tunable = false;
  /// A perturbed value hit a bound and was clamped.
  bool clamped = false;
};

/// Central finite-difference log-sensitivity of every element, ranked by
/// |sensitivity| (descending, ties by position). Non-tunable elements are
/// listed with sensitivity 0. `band` defaults to the whole sweep.
std::vector<ElementSensitivity> sensitivity_analysis(const NetworkTopology& t, const FrequencySweep& sweep,
                                                     double z_ref, SParam goal_param, double rel_step = 0.01,
                                                     std::optional<std::pair<double, double>> band = std::nullopt);

struct GaConfig {
  std::size_t population = 64;
  std::size_t generations = 200;
  double mutation_rate = 0.2;   // per gene
  double crossover_rate = 0.9;  // per child
  double mutation_sigma_decades = 0.1;
  std::size_t tournament_size = 3;
  std::uint64_t rng_seed = 1;
  std::size_t workers = 1;
  /// Stop as soon as the best cost reaches zero.
  bool stop_when_met = true;

  void validate() const;
};

struct GaResult {
  NetworkTopology topology;
  double cost = 0;
  /// Best cost of the initial population, then of each generation.
  std::vector<double> cost_trace;
};

/// Genetic search over the tunable element values (log10 encoding, bounds
/// respected). Individual 0 of the initial population is the topology as
/// given, the rest are log-uniform. Tournament selection, uniform
/// crossover, Gaussian mutation in log space, elitism of one. Each child
/// draws from its own stream keyed by (seed, generation, index), so the
/// result does not depend on `workers`.
GaResult optimize_ga(const NetworkTopology& t, const GoalSet& goals, const GaConfig& cfg, const FrequencySweep& sweep,
                     double z_ref);

/// "generation,best_cost" CSV.
std::string cost_trace_csv(const std::vector<double>& trace);

}  // namespace bhd::rf
