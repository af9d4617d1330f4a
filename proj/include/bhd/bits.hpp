#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace bhd {

/// Packed bit string, MSB-first within each byte. Bits past `size()` in the
/// last byte are always zero, so byte-wise comparison and hashing are exact.
class BitVector {
public:
  BitVector() = default;
  explicit BitVector(std::size_t nbits) : bytes_((nbits + 7) / 8, 0), size_(nbits) {}

  /// Takes the first `nbits` bits of `bytes` (MSB-first). Throws DomainError
  /// when `bytes` is too short.
  static BitVector from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits);
  static BitVector from_bytes(std::span<const std::uint8_t> bytes) {
    return from_bytes(bytes, bytes.size() * 8);
  }
  /// From a sequence of 0/1 values.
  static BitVector from_bits(std::span<const std::uint8_t> bits);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool operator[](std::size_t i) const noexcept {
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1U;
  }
  void set(std::size_t i, bool v) noexcept {
    const auto mask = static_cast<std::uint8_t>(0x80U >> (i & 7));
    if (v)
      bytes_[i >> 3] |= mask;
    else
      bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
  }
  void push_back(bool v);
  /// Appends the low `width` bits of `value`, most significant first.
  void append_bits(std::uint64_t value, unsigned width);
  void append(const BitVector& other);

  std::size_t count_ones() const noexcept;

  /// Copies bits [offset, offset + nbits) into 64-bit words, MSB-first
  /// (bit offset lands in bit 63 of word 0). Trailing bits of the last word
  /// are zero. `out` must hold (nbits + 63) / 64 words.
  void copy_words(std::size_t offset, std::size_t nbits, std::span<std::uint64_t> out) const;

  /// Unpacked 0/1 view, one byte per bit.
  std::vector<std::uint8_t> unpack() const;
  BitVector slice(std::size_t offset, std::size_t nbits) const;

  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

  BitVector operator^(const BitVector& other) const;
  bool operator==(const BitVector&) const = default;

private:
  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
};

/// Raw packed bytes of `bits`; a trailing partial byte is zero-padded.
void write_bits_raw(const std::filesystem::path& path, const BitVector& bits);
/// Reads a whole file as packed bits (8 bits per byte).
BitVector read_bits_raw(const std::filesystem::path& path);

}  // namespace bhd
