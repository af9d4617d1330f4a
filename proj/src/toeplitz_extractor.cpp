#include "bhd/toeplitz_extractor.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "bhd/digest.hpp"
#include "bhd/error.hpp"
#include "bhd/parallel.hpp"
#include "bhd/random.hpp"

namespace bhd::extract {

std::string_view to_string(SizingMode m) {
  return m == SizingMode::paper_literal_log10 ? "paper_literal_log10" : "standard_log2";
}

SizingMode parse_sizing_mode(std::string_view text) {
  if (text == "paper_literal_log10" || text == "paper-literal" || text == "paper_literal")
    return SizingMode::paper_literal_log10;
  if (text == "standard_log2" || text == "standard") return SizingMode::standard_log2;
  throw DomainError("unknown sizing mode '" + std::string(text) + "'");
}

std::size_t size_output(std::size_t n_in, double h_min_per_bit, double epsilon_hash, SizingMode mode) {
  if (n_in == 0) throw DomainError("size_output: n_in must be > 0");
  if (!(h_min_per_bit > 0 && h_min_per_bit <= 1)) throw DomainError("size_output: h_min_per_bit must lie in (0, 1]");
  if (!(epsilon_hash > 0 && epsilon_hash <= 1)) throw DomainError("size_output: epsilon_hash must lie in (0, 1]");
  const double log_term =
      mode == SizingMode::paper_literal_log10 ? std::log10(1.0 / epsilon_hash) : std::log2(1.0 / epsilon_hash);
  // The small slack keeps exact products such as 2207 * 1.0 from flooring down.
  const double m = std::floor(static_cast<double>(n_in) * h_min_per_bit - 2.0 * log_term + 1e-9);
  if (m <= 0)
    throw SizingError("size_output: no output bits left (n*h = " + std::to_string(n_in * h_min_per_bit) +
                      ", security term = " + std::to_string(2.0 * log_term) + ")");
  return std::min(static_cast<std::size_t>(m), n_in);
}

void ExtractorConfig::validate() const {
  if (!(m_out > 0 && m_out <= n_in)) throw DomainError("ExtractorConfig: need 0 < m_out <= n_in");
  if (!(h_min_per_bit > 0 && h_min_per_bit <= 1)) throw DomainError("ExtractorConfig: h_min_per_bit must lie in (0, 1]");
  if (!(epsilon_hash > 0 && epsilon_hash < 1)) throw DomainError("ExtractorConfig: epsilon_hash must lie in (0, 1)");
}

ToeplitzSeed ToeplitzSeed::from_u64(std::uint64_t seed, std::size_t length, std::uint64_t channel) {
  SplitMix64 rng(derive_key(seed, 0x544F45504C49545AULL, channel));
  ToeplitzSeed s;
  s.rng_seed_used = seed;
  for (std::size_t done = 0; done < length; done += 64) {
    const auto take = static_cast<unsigned>(std::min<std::size_t>(64, length - done));
    const std::uint64_t w = rng();
    s.bits.append_bits(take == 64 ? w : w >> (64 - take), take);
  }
  return s;
}

ToeplitzSeed ToeplitzSeed::from_file(const std::filesystem::path& path, std::size_t length) {
  const BitVector raw = read_bits_raw(path);
  if (raw.size() < length)
    throw DomainError("seed file " + path.string() + " holds " + std::to_string(raw.size()) + " bits, need " +
                      std::to_string(length));
  return {raw.slice(0, length), std::nullopt};
}

std::string ToeplitzSeed::digest() const { return sha256_hex(bits.bytes()); }

ToeplitzExtractor::ToeplitzExtractor(const ToeplitzSeed& seed, std::size_t n_in, std::size_t m_out)
    : n_(n_in), m_(m_out), words_((n_in + 63) / 64), seed_digest_(seed.digest()) {
  if (n_ == 0 || m_ == 0) throw DomainError("ToeplitzExtractor: dimensions must be > 0");
  if (seed.bits.size() != n_ + m_ - 1)
    throw DomainError("ToeplitzExtractor: seed has " + std::to_string(seed.bits.size()) + " bits, need " +
                      std::to_string(n_ + m_ - 1));
  rows_.assign(m_ * words_, 0);
  // Row i, column j reads seed[i + n - 1 - j]: the seed window [i, i + n)
  // reversed.
  for (std::size_t i = 0; i < m_; ++i) {
    std::uint64_t* row = rows_.data() + i * words_;
    for (std::size_t j = 0; j < n_; ++j)
      if (seed.bits[i + n_ - 1 - j]) row[j / 64] |= std::uint64_t{1} << (63 - j % 64);
  }
}

bool ToeplitzExtractor::coefficient(std::size_t i, std::size_t j) const {
  if (i >= m_ || j >= n_) throw DomainError("ToeplitzExtractor::coefficient: index out of range");
  return (rows_[i * words_ + j / 64] >> (63 - j % 64)) & 1U;
}

BitVector ToeplitzExtractor::extract_words(std::span<const std::uint64_t> x) const {
  if (x.size() != words_) throw DomainError("extract_words: wrong word count");
  BitVector y(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    const std::uint64_t* row = rows_.data() + i * words_;
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < words_; ++w) acc ^= row[w] & x[w];
    y.set(i, std::popcount(acc) & 1);
  }
  return y;
}

BitVector ToeplitzExtractor::extract_block(const BitVector& x) const {
  if (x.size() != n_)
    throw DomainError("extract_block: block has " + std::to_string(x.size()) + " bits, expected " + std::to_string(n_));
  std::vector<std::uint64_t> words(words_);
  x.copy_words(0, n_, words);
  return extract_words(words);
}

std::size_t StreamResult::output_bits() const {
  std::size_t total = 0;
  for (const auto& c : channel_outputs) total += c.size();
  return total;
}

StreamResult extract_bits(const BitVector& input, const std::vector<ToeplitzExtractor>& channels, std::size_t workers) {
  if (channels.empty()) throw DomainError("extract_stream: need at least one channel");
  const std::size_t n = channels.front().n_in();
  const std::size_t m = channels.front().m_out();
  for (const auto& c : channels)
    if (c.n_in() != n || c.m_out() != m) throw DomainError("extract_stream: channel extractors differ in shape");

  StreamResult r;
  r.input_bits = input.size();
  r.blocks = input.size() / n;
  r.discarded_bits = input.size() - r.blocks * n;
  if (r.blocks == 0)
    r.warnings.push_back("input of " + std::to_string(input.size()) + " bits is shorter than one " +
                         std::to_string(n) + "-bit block; no output");
  else if (r.discarded_bits)
    r.warnings.push_back("discarded trailing " + std::to_string(r.discarded_bits) + " bits");

  std::vector<BitVector> out(r.blocks);
  parallel_for(r.blocks, workers, [&](std::size_t b) {
    std::vector<std::uint64_t> words((n + 63) / 64);
    input.copy_words(b * n, n, words);
    out[b] = channels[b % channels.size()].extract_words(words);
  });

  r.channel_outputs.assign(channels.size(), BitVector{});
  for (std::size_t b = 0; b < r.blocks; ++b) r.channel_outputs[b % channels.size()].append(out[b]);
  return r;
}

StreamResult extract_stream(std::span<const std::uint16_t> codes, unsigned code_bits,
                            const std::vector<ToeplitzExtractor>& channels, std::size_t workers) {
  if (code_bits < 1 || code_bits > 16) throw DomainError("extract_stream: code_bits must lie in [1, 16]");
  BitVector bits;
  for (auto c : codes) {
    if (c >> code_bits) throw DomainError("extract_stream: code exceeds code_bits");
    bits.append_bits(c, code_bits);
  }
  return extract_bits(bits, channels, workers);
}

double effective_rate_bps(std::size_t channels, double sample_rate, unsigned code_bits, std::size_t m_out,
                          std::size_t n_in) {
  if (n_in == 0) throw DomainError("effective_rate_bps: n_in must be > 0");
  return static_cast<double>(channels) * sample_rate * code_bits * static_cast<double>(m_out) /
         static_cast<double>(n_in);
}

BenchResult throughput_bench(const ToeplitzExtractor& ex, std::size_t blocks, std::size_t workers, std::uint64_t seed) {
  BenchResult r;
  r.workers = std::max<std::size_t>(1, workers);
  r.input_bits = blocks * ex.n_in();
  r.output_bits = blocks * ex.m_out();
  if (blocks == 0) return r;

  const std::size_t words = (ex.n_in() + 63) / 64;
  std::vector<std::uint64_t> input(blocks * words);
  SplitMix64 rng(seed);
  for (auto& w : input) w = rng();
  if (const unsigned tail = ex.n_in() % 64)
    for (std::size_t b = 0; b < blocks; ++b) input[b * words + words - 1] &= ~std::uint64_t{0} << (64 - tail);

  std::vector<BitVector> out(blocks);
  auto run = [&](std::size_t w) {
    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(blocks, w, [&](std::size_t b) {
      out[b] = ex.extract_words(std::span<const std::uint64_t>(input.data() + b * words, words));
    });
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  r.seconds_single = run(1);
  r.seconds_parallel = r.workers == 1 ? r.seconds_single : run(r.workers);
  if (r.seconds_single > 0) r.bits_per_second_single = static_cast<double>(r.output_bits) / r.seconds_single;
  if (r.seconds_parallel > 0) r.speedup = r.seconds_single / r.seconds_parallel;
  return r;
}

void write_bit_file(const std::filesystem::path& path, const BitVector& bits, const ToeplitzExtractor& ex,
                    std::size_t blocks) {
  write_bits_raw(path, bits);
  nlohmann::json side = {{"bit_order", "msb-first"},
                         {"bits", bits.size()},
                         {"n_in", ex.n_in()},
                         {"m_out", ex.m_out()},
                         {"seed_sha256", ex.seed_digest()},
                         {"blocks", blocks}};
  std::ofstream meta(path.string() + ".json");
  if (!meta) throw Error("cannot write sidecar for " + path.string());
  meta << side.dump(2) << '\n';
}

}  // namespace bhd::extract
