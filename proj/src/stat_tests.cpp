#include "bhd/stat_tests.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <tuple>

#include "bhd/error.hpp"
#include "bhd/parallel.hpp"
#include "bhd/special.hpp"

namespace bhd::stats {

namespace {

TestResult make(std::string name, double p, double alpha, std::string params = {}) {
  p = std::clamp(p, 0.0, 1.0);
  return {std::move(name), p, p >= alpha, std::move(params)};
}

void require_length(const BitVector& s, std::size_t min_n, const char* test) {
  if (s.size() < min_n)
    throw ApplicabilityError(std::string(test) + " needs at least " + std::to_string(min_n) + " bits, got " +
                             std::to_string(s.size()));
}

unsigned floor_log2(std::size_t n) { return n ? static_cast<unsigned>(std::bit_width(n) - 1) : 0; }

// Overlapping m-bit pattern counts with the sequence wrapped around.
std::vector<std::uint32_t> pattern_counts(const std::vector<std::uint8_t>& bits, unsigned m) {
  std::vector<std::uint32_t> counts(std::size_t{1} << m, 0);
  if (m == 0) {
    counts[0] = static_cast<std::uint32_t>(bits.size());
    return counts;
  }
  const std::size_t n = bits.size();
  const std::uint32_t mask = (std::uint32_t{1} << m) - 1;
  std::uint32_t v = 0;
  for (unsigned k = 0; k + 1 < m; ++k) v = (v << 1) | bits[k % n];
  for (std::size_t i = 0; i < n; ++i) {
    v = ((v << 1) | bits[(i + m - 1) % n]) & mask;
    ++counts[v];
  }
  return counts;
}

double psi_squared(const std::vector<std::uint8_t>& bits, unsigned m) {
  if (m == 0) return 0.0;
  const auto counts = pattern_counts(bits, m);
  double sum = 0;
  for (auto c : counts) sum += static_cast<double>(c) * static_cast<double>(c);
  const double n = static_cast<double>(bits.size());
  return std::ldexp(sum, static_cast<int>(m)) / n - n;
}

double phi(const std::vector<std::uint8_t>& bits, unsigned m) {
  if (m == 0) return 0.0;
  const auto counts = pattern_counts(bits, m);
  const double n = static_cast<double>(bits.size());
  double sum = 0;
  for (auto c : counts)
    if (c) {
      const double pi = static_cast<double>(c) / n;
      sum += pi * std::log(pi);
    }
  return sum;
}

}  // namespace

TestResult monobit_frequency(const BitVector& s, double alpha) {
  require_length(s, 100, "monobit");
  const double n = static_cast<double>(s.size());
  const double sum = 2.0 * static_cast<double>(s.count_ones()) - n;
  const double s_obs = std::fabs(sum) / std::sqrt(n);
  return make("monobit", std::erfc(s_obs / std::numbers::sqrt2), alpha);
}

TestResult block_frequency(const BitVector& s, std::size_t block_len, double alpha) {
  if (block_len == 0) throw DomainError("block_frequency: block length must be > 0");
  require_length(s, std::max<std::size_t>(100, block_len), "block_frequency");
  const std::size_t blocks = s.size() / block_len;
  double chi2 = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < block_len; ++j) ones += s[b * block_len + j];
    const double pi = static_cast<double>(ones) / static_cast<double>(block_len) - 0.5;
    chi2 += pi * pi;
  }
  chi2 *= 4.0 * static_cast<double>(block_len);
  return make("block_frequency", gamma_q(static_cast<double>(blocks) / 2.0, chi2 / 2.0), alpha,
              "M=" + std::to_string(block_len));
}

TestResult runs(const BitVector& s, double alpha) {
  require_length(s, 100, "runs");
  const double n = static_cast<double>(s.size());
  const double pi = static_cast<double>(s.count_ones()) / n;
  if (std::fabs(pi - 0.5) >= 2.0 / std::sqrt(n)) return make("runs", 0.0, alpha, "prerequisite failed");
  std::size_t v = 1;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) v += s[i] != s[i + 1];
  const double num = std::fabs(static_cast<double>(v) - 2.0 * n * pi * (1.0 - pi));
  const double den = 2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi);
  return make("runs", std::erfc(num / den), alpha);
}

TestResult longest_run_in_block(const BitVector& s, double alpha) {
  require_length(s, 128, "longest_run");
  const std::size_t n = s.size();
  std::size_t m;
  unsigned v_lo;
  std::vector<double> pi;
  if (n < 6272) {
    m = 8;
    v_lo = 1;
    pi = {0.2148, 0.3672, 0.2305, 0.1875};
  } else if (n < 750000) {
    m = 128;
    v_lo = 4;
    pi = {0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124};
  } else {
    m = 10000;
    v_lo = 10;
    pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
  }
  const std::size_t k = pi.size() - 1;
  const std::size_t blocks = n / m;
  std::vector<std::size_t> nu(pi.size(), 0);
  for (std::size_t b = 0; b < blocks; ++b) {
    unsigned run = 0, longest = 0;
    for (std::size_t j = 0; j < m; ++j) {
      run = s[b * m + j] ? run + 1 : 0;
      longest = std::max(longest, run);
    }
    const std::size_t cat = longest <= v_lo ? 0 : std::min<std::size_t>(longest - v_lo, k);
    ++nu[cat];
  }
  double chi2 = 0;
  const double nb = static_cast<double>(blocks);
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const double e = nb * pi[i];
    chi2 += (static_cast<double>(nu[i]) - e) * (static_cast<double>(nu[i]) - e) / e;
  }
  return make("longest_run", gamma_q(static_cast<double>(k) / 2.0, chi2 / 2.0), alpha, "M=" + std::to_string(m));
}

std::vector<TestResult> cumulative_sums(const BitVector& s, double alpha) {
  require_length(s, 100, "cumulative_sums");
  const long n = static_cast<long>(s.size());
  auto max_excursion = [&](bool reverse) {
    long sum = 0, z = 0;
    for (long i = 0; i < n; ++i) {
      const long idx = reverse ? n - 1 - i : i;
      sum += s[static_cast<std::size_t>(idx)] ? 1 : -1;
      z = std::max(z, std::labs(sum));
    }
    return z;
  };
  auto p_value = [&](long z) {
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const double zd = static_cast<double>(z);
    // Summation limits use C integer division, as in the reference code.
    double sum1 = 0;
    for (long k = (-n / z + 1) / 4; k <= (n / z - 1) / 4; ++k)
      sum1 += normal_cdf((4.0 * k + 1) * zd / sqrt_n) - normal_cdf((4.0 * k - 1) * zd / sqrt_n);
    double sum2 = 0;
    for (long k = (-n / z - 3) / 4; k <= (n / z - 1) / 4; ++k)
      sum2 += normal_cdf((4.0 * k + 3) * zd / sqrt_n) - normal_cdf((4.0 * k + 1) * zd / sqrt_n);
    return 1.0 - sum1 + sum2;
  };
  return {make("cumulative_sums_forward", p_value(max_excursion(false)), alpha),
          make("cumulative_sums_reverse", p_value(max_excursion(true)), alpha)};
}

std::vector<TestResult> serial(const BitVector& s, unsigned m, double alpha) {
  require_length(s, 100, "serial");
  if (m < 2) throw DomainError("serial: m must be >= 2");
  if (static_cast<long>(m) >= static_cast<long>(floor_log2(s.size())) - 2)
    throw ApplicabilityError("serial: m = " + std::to_string(m) + " too large for n = " + std::to_string(s.size()));
  const auto bits = s.unpack();
  const double p0 = psi_squared(bits, m);
  const double p1 = psi_squared(bits, m - 1);
  const double p2 = psi_squared(bits, m - 2);
  const double d1 = p0 - p1;
  const double d2 = p0 - 2.0 * p1 + p2;
  const std::string params = "m=" + std::to_string(m);
  return {make("serial_1", gamma_q(std::ldexp(1.0, static_cast<int>(m) - 2), d1 / 2.0), alpha, params),
          make("serial_2", gamma_q(std::ldexp(1.0, static_cast<int>(m) - 3), d2 / 2.0), alpha, params)};
}

TestResult approximate_entropy(const BitVector& s, unsigned m, double alpha) {
  require_length(s, 100, "approximate_entropy");
  if (m < 1) throw DomainError("approximate_entropy: m must be >= 1");
  if (static_cast<long>(m) >= static_cast<long>(floor_log2(s.size())) - 5)
    throw ApplicabilityError("approximate_entropy: m = " + std::to_string(m) + " too large for n = " +
                             std::to_string(s.size()));
  const auto bits = s.unpack();
  const double apen = phi(bits, m) - phi(bits, m + 1);
  const double chi2 = 2.0 * static_cast<double>(s.size()) * (std::numbers::ln2 - apen);
  return make("approximate_entropy", gamma_q(std::ldexp(1.0, static_cast<int>(m) - 1), chi2 / 2.0), alpha,
              "m=" + std::to_string(m));
}

std::vector<TestResult> run_all(const BitVector& s, const SuiteParams& params) {
  const double a = params.alpha;
  std::vector<TestResult> out;
  out.push_back(monobit_frequency(s, a));
  out.push_back(block_frequency(s, params.block_len, a));
  out.push_back(runs(s, a));
  out.push_back(longest_run_in_block(s, a));
  for (auto& r : cumulative_sums(s, a)) out.push_back(std::move(r));
  for (auto& r : serial(s, params.serial_m, a)) out.push_back(std::move(r));
  out.push_back(approximate_entropy(s, params.apen_m, a));
  return out;
}

std::pair<double, double> proportion_interval(double alpha, std::size_t k) {
  if (!(alpha > 0 && alpha < 1)) throw DomainError("proportion_interval: alpha must lie in (0, 1)");
  if (k == 0) throw DomainError("proportion_interval: k must be > 0");
  const double p = 1.0 - alpha;
  const double half = 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(k));
  return {p - half, p + half};
}

SuiteReport run_suite(std::span<const BitVector> sequences, const SuiteParams& params, std::size_t workers) {
  if (sequences.size() < 10) throw ApplicabilityError("run_suite: need at least 10 sequences");
  std::vector<std::vector<TestResult>> results(sequences.size());
  parallel_for(sequences.size(), workers, [&](std::size_t i) { results[i] = run_all(sequences[i], params); });

  SuiteReport r;
  r.sequences = sequences.size();
  r.bits_per_sequence = sequences.front().size();
  r.alpha = params.alpha;
  std::tie(r.ci_low, r.ci_high) = proportion_interval(params.alpha, r.sequences);
  r.all_pass = true;
  for (std::size_t t = 0; t < results.front().size(); ++t) {
    SuiteRow row;
    row.test_name = results.front()[t].test_name;
    row.total = r.sequences;
    std::vector<std::size_t> bins(10, 0);
    for (const auto& seq : results) {
      const auto& tr = seq[t];
      row.p_values.push_back(tr.p_value);
      row.passed += tr.passed;
      ++bins[std::min<std::size_t>(9, static_cast<std::size_t>(tr.p_value * 10.0))];
    }
    row.proportion = static_cast<double>(row.passed) / static_cast<double>(row.total);
    row.within_ci = row.proportion >= r.ci_low && row.proportion <= r.ci_high;
    const double expected = static_cast<double>(row.total) / 10.0;
    double chi2 = 0;
    for (auto b : bins) chi2 += (static_cast<double>(b) - expected) * (static_cast<double>(b) - expected) / expected;
    row.uniformity_p = gamma_q(4.5, chi2 / 2.0);
    r.all_pass = r.all_pass && row.within_ci;
    r.rows.push_back(std::move(row));
  }
  return r;
}

std::vector<BitVector> split_sequences(const BitVector& bits, std::size_t length, std::size_t count) {
  if (length == 0) throw DomainError("split_sequences: length must be > 0");
  std::vector<BitVector> out;
  for (std::size_t off = 0; off + length <= bits.size() && out.size() < count; off += length)
    out.push_back(bits.slice(off, length));
  return out;
}

std::string suite_csv(const SuiteReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << "test,passed,total,proportion,within_ci,uniformity_p\n";
  for (const auto& row : r.rows)
    os << row.test_name << ',' << row.passed << ',' << row.total << ',' << row.proportion << ','
       << (row.within_ci ? "true" : "false") << ',' << row.uniformity_p << '\n';
  return os.str();
}

double ks_uniform_statistic(std::vector<double> values) {
  if (values.empty()) throw DomainError("ks_uniform_statistic: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - values[i]);
    d = std::max(d, values[i] - static_cast<double>(i) / n);
  }
  return d;
}

}  // namespace bhd::stats
