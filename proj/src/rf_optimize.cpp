#include "bhd/rf_optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "bhd/error.hpp"
#include "bhd/parallel.hpp"
#include "bhd/random.hpp"

namespace bhd::rf {

std::string_view to_string(Comparison c) { return c == Comparison::below ? "below" : "above"; }

Comparison parse_comparison(std::string_view text) {
  if (text == "below") return Comparison::below;
  if (text == "above") return Comparison::above;
  throw DomainError("unknown comparison '" + std::string(text) + "' (expected below or above)");
}

void validate_goals(const GoalSet& goals, const FrequencySweep& sweep) {
  if (sweep.empty()) throw DomainError("validate_goals: empty sweep");
  for (const auto& g : goals) {
    if (!(g.band_lo <= g.band_hi)) throw DomainError("goal band must satisfy lo <= hi");
    if (g.band_lo < sweep.front() || g.band_hi > sweep.back())
      throw DomainError("goal band [" + std::to_string(g.band_lo) + ", " + std::to_string(g.band_hi) +
                        "] Hz lies outside the sweep span");
    if (!std::isfinite(g.threshold_db)) throw DomainError("goal threshold must be finite");
  }
}

double evaluate_goals(const TwoPortNetwork& n, const GoalSet& goals) {
  double cost = 0;
  for (const auto& g : goals) {
    for (std::size_t i = 0; i < n.s.size(); ++i) {
      const double f = n.sweep[i];
      if (f < g.band_lo || f > g.band_hi) continue;
      const double db = magnitude_db(element(n.s[i], g.param));
      const double violation = g.comparison == Comparison::below ? db - g.threshold_db : g.threshold_db - db;
      if (violation > 0) cost += violation * violation;
    }
  }
  return cost;
}

namespace {

double band_mean_db(const TwoPortNetwork& n, SParam p, double lo, double hi) {
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n.s.size(); ++i) {
    if (n.sweep[i] < lo || n.sweep[i] > hi) continue;
    sum += magnitude_db(element(n.s[i], p));
    ++count;
  }
  if (count == 0) throw DomainError("sensitivity_analysis: band contains no sweep points");
  return sum / static_cast<double>(count);
}

}  // namespace

std::vector<ElementSensitivity> sensitivity_analysis(const NetworkTopology& t, const FrequencySweep& sweep,
                                                     double z_ref, SParam goal_param, double rel_step,
                                                     std::optional<std::pair<double, double>> band) {
  if (!(rel_step > 0 && rel_step <= 0.5)) throw DomainError("sensitivity_analysis: rel_step must lie in (0, 0.5]");
  if (t.empty()) throw DomainError("sensitivity_analysis: topology is empty");
  for (const auto& e : t) e.validate();
  const auto [lo, hi] = band.value_or(std::pair{sweep.front(), sweep.back()});

  std::vector<ElementSensitivity> out;
  out.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    ElementSensitivity s;
    s.index = i;
    s.label = t[i].label;
    s.tunable = t[i].is_tunable();
    if (s.tunable) {
      const double x = t[i].value;
      double up = x * (1.0 + rel_step);
      double down = x * (1.0 - rel_step);
      if (up > t[i].max) {
        up = t[i].max;
        s.clamped = true;
      }
      if (down < t[i].min) {
        down = t[i].min;
        s.clamped = true;
      }
      NetworkTopology probe = t;
      probe[i].value = up;
      const double f_up = band_mean_db(evaluate_chain(probe, sweep, z_ref), goal_param, lo, hi);
      probe[i].value = down;
      const double f_down = band_mean_db(evaluate_chain(probe, sweep, z_ref), goal_param, lo, hi);
      // Equals 2 * rel_step when nothing was clamped.
      const double step = (up - down) / x;
      s.sensitivity = step > 0 ? (f_up - f_down) / step : 0.0;
    }
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::fabs(a.sensitivity) > std::fabs(b.sensitivity);
  });
  return out;
}

void GaConfig::validate() const {
  if (population < 2) throw DomainError("GaConfig: population must be >= 2");
  if (!(mutation_rate >= 0 && mutation_rate <= 1)) throw DomainError("GaConfig: mutation_rate must lie in [0, 1]");
  if (!(crossover_rate >= 0 && crossover_rate <= 1)) throw DomainError("GaConfig: crossover_rate must lie in [0, 1]");
  if (!(mutation_sigma_decades >= 0)) throw DomainError("GaConfig: mutation_sigma_decades must be >= 0");
  if (tournament_size < 1) throw DomainError("GaConfig: tournament_size must be >= 1");
}

namespace {

struct Gene {
  std::size_t element;
  double lo;  // log10 bounds
  double hi;
};

using Genome = std::vector<double>;

NetworkTopology apply(const NetworkTopology& base, const std::vector<Gene>& genes, const Genome& g) {
  NetworkTopology t = base;
  for (std::size_t k = 0; k < genes.size(); ++k) {
    const auto& e = base[genes[k].element];
    t[genes[k].element].value = std::clamp(std::pow(10.0, g[k]), e.min, e.max);
  }
  return t;
}

std::size_t best_index(const std::vector<double>& cost) {
  // First minimum; NaN never wins.
  std::size_t best = 0;
  for (std::size_t i = 1; i < cost.size(); ++i)
    if (cost[i] < cost[best] || std::isnan(cost[best])) best = i;
  return best;
}

}  // namespace

GaResult optimize_ga(const NetworkTopology& t, const GoalSet& goals, const GaConfig& cfg, const FrequencySweep& sweep,
                     double z_ref) {
  cfg.validate();
  validate_goals(goals, sweep);
  if (t.empty()) throw DomainError("optimize_ga: topology is empty");
  for (const auto& e : t) e.validate();

  std::vector<Gene> genes;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i].is_tunable()) genes.push_back({i, std::log10(t[i].min), std::log10(t[i].max)});
  if (genes.empty()) throw DomainError("optimize_ga: no tunable elements (need min < max on a passive element)");

  auto cost_of = [&](const Genome& g) {
    try {
      const double c = evaluate_goals(evaluate_chain(apply(t, genes, g), sweep, z_ref), goals);
      return std::isnan(c) ? std::numeric_limits<double>::infinity() : c;
    } catch (const SingularityError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const std::size_t n = cfg.population;
  std::vector<Genome> pop(n, Genome(genes.size()));
  for (std::size_t k = 0; k < genes.size(); ++k) pop[0][k] = std::log10(t[genes[k].element].value);
  for (std::size_t i = 1; i < n; ++i) {
    SplitMix64 rng(derive_key(cfg.rng_seed, 0, i));
    for (std::size_t k = 0; k < genes.size(); ++k)
      pop[i][k] = genes[k].lo + (genes[k].hi - genes[k].lo) * uniform01(rng);
  }

  std::vector<double> cost(n);
  auto evaluate_all = [&] { parallel_for(n, cfg.workers, [&](std::size_t i) { cost[i] = cost_of(pop[i]); }); };
  evaluate_all();

  GaResult result;
  std::size_t best = best_index(cost);
  result.cost_trace.push_back(cost[best]);

  auto tournament = [&](SplitMix64& rng) {
    std::size_t winner = uniform_index(rng, n);
    for (std::size_t r = 1; r < cfg.tournament_size; ++r) {
      const std::size_t c = uniform_index(rng, n);
      if (cost[c] < cost[winner] || (cost[c] == cost[winner] && c < winner)) winner = c;
    }
    return winner;
  };

  for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
    if (cfg.stop_when_met && cost[best] == 0.0) break;
    std::vector<Genome> next(n);
    next[0] = pop[best];
    for (std::size_t i = 1; i < n; ++i) {
      GaussianSource gauss(derive_key(cfg.rng_seed, gen, i));
      SplitMix64& rng = gauss.engine();
      const Genome& a = pop[tournament(rng)];
      Genome child = a;
      if (uniform01(rng) < cfg.crossover_rate) {
        const Genome& b = pop[tournament(rng)];
        for (std::size_t k = 0; k < child.size(); ++k)
          if (uniform01(rng) < 0.5) child[k] = b[k];
      }
      for (std::size_t k = 0; k < child.size(); ++k) {
        if (uniform01(rng) < cfg.mutation_rate)
          child[k] = std::clamp(child[k] + cfg.mutation_sigma_decades * gauss(), genes[k].lo, genes[k].hi);
      }
      next[i] = std::move(child);
    }
    const double elite_cost = cost[best];
    pop = std::move(next);
    cost[0] = elite_cost;
    parallel_for(n - 1, cfg.workers, [&](std::size_t i) { cost[i + 1] = cost_of(pop[i + 1]); });
    best = best_index(cost);
    result.cost_trace.push_back(cost[best]);
  }

  result.topology = apply(t, genes, pop[best]);
  result.cost = cost[best];
  return result;
}

std::string cost_trace_csv(const std::vector<double>& trace) {
  std::ostringstream os;
  os.precision(12);
  os << "generation,best_cost\n";
  for (std::size_t g = 0; g < trace.size(); ++g) os << g << ',' << trace[g] << '\n';
  return os.str();
}

}  // namespace bhd::rf
