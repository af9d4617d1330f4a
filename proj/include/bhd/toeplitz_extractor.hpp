#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bhd/bits.hpp"

namespace bhd::extract {

/// Base of the log in the security term 2 log(1/eps).
enum class SizingMode { paper_literal_log10, standard_log2 };
std::string_view to_string(SizingMode m);
/// Accepts the enum names and "paper-literal" / "standard".
SizingMode parse_sizing_mode(std::string_view text);

/// floor(n_in * h_min_per_bit - 2 log_b(1/eps)). Throws SizingError when the
/// result is not positive.
std::size_t size_output(std::size_t n_in, double h_min_per_bit, double epsilon_hash, SizingMode mode);

struct ExtractorConfig {
  std::size_t n_in = 0;
  std::size_t m_out = 0;
  double epsilon_hash = 0;
  double h_min_per_bit = 0;

  void validate() const;
};

struct ToeplitzSeed {
  BitVector bits;  // m_out + n_in - 1 bits
  std::optional<std::uint64_t> rng_seed_used;

  /// Expands a 64-bit seed with SplitMix64 keyed by (seed, channel).
  static ToeplitzSeed from_u64(std::uint64_t seed, std::size_t length, std::uint64_t channel = 0);
  /// First `length` bits of a raw file (MSB-first).
  static ToeplitzSeed from_file(const std::filesystem::path& path, std::size_t length);

  std::string digest() const;
};

/// Immutable m_out x n_in Toeplitz matrix over GF(2),
/// T[i][j] = seed[i - j + n_in - 1]. Rows are kept packed in 64-bit words;
/// each output bit is the parity of (row AND input).
class ToeplitzExtractor {
public:
  ToeplitzExtractor(const ToeplitzSeed& seed, std::size_t n_in, std::size_t m_out);

  std::size_t n_in() const noexcept { return n_; }
  std::size_t m_out() const noexcept { return m_; }
  bool coefficient(std::size_t i, std::size_t j) const;
  const std::string& seed_digest() const noexcept { return seed_digest_; }

  BitVector extract_block(const BitVector& x) const;
  /// Input already packed as (n_in + 63) / 64 MSB-first words.
  BitVector extract_words(std::span<const std::uint64_t> x) const;

private:
  std::size_t n_;
  std::size_t m_;
  std::size_t words_;
  std::vector<std::uint64_t> rows_;
  std::string seed_digest_;
};

struct StreamResult {
  std::vector<BitVector> channel_outputs;
  std::size_t input_bits = 0;
  std::size_t blocks = 0;
  std::size_t discarded_bits = 0;
  std::vector<std::string> warnings;

  std::size_t output_bits() const;
};

/// Serializes codes MSB-first at `code_bits` each, cuts n_in-bit blocks
/// (the trailing partial block is dropped, never padded) and hands block b
/// to channel b mod channels.size(). All extractors must share n_in, m_out.
StreamResult extract_stream(std::span<const std::uint16_t> codes, unsigned code_bits,
                            const std::vector<ToeplitzExtractor>& channels, std::size_t workers = 1);
StreamResult extract_bits(const BitVector& input, const std::vector<ToeplitzExtractor>& channels,
                          std::size_t workers = 1);

/// channels * sample_rate * code_bits * m_out / n_in.
double effective_rate_bps(std::size_t channels, double sample_rate, unsigned code_bits, std::size_t m_out,
                          std::size_t n_in);

struct BenchResult {
  std::size_t input_bits = 0;
  std::size_t output_bits = 0;
  double seconds_single = 0;
  double seconds_parallel = 0;
  std::size_t workers = 1;
  double bits_per_second_single = 0;  // output bits
  double speedup = 0;
};

/// Wall-clock throughput on `blocks` pseudo-random input blocks, once with
/// one worker and once with `workers`. Report only.
BenchResult throughput_bench(const ToeplitzExtractor& ex, std::size_t blocks, std::size_t workers,
                             std::uint64_t seed = 1);

/// Raw packed bits plus `<path>.json` with n_in, m_out, seed digest, blocks.
void write_bit_file(const std::filesystem::path& path, const BitVector& bits, const ToeplitzExtractor& ex,
                    std::size_t blocks);

}  // namespace bhd::extract
