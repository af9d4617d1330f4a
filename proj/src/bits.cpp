#include "bhd/bits.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>

#include "bhd/error.hpp"

namespace bhd {

BitVector BitVector::from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits) {
  if (bytes.size() * 8 < nbits) throw DomainError("BitVector::from_bytes: not enough bytes for requested bit count");
  BitVector v(nbits);
  std::copy_n(bytes.begin(), v.bytes_.size(), v.bytes_.begin());
  if (nbits % 8 != 0) v.bytes_.back() &= static_cast<std::uint8_t>(0xFFU << (8 - nbits % 8));
  return v;
}

BitVector BitVector::from_bits(std::span<const std::uint8_t> bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) v.set(i, true);
  return v;
}

void BitVector::push_back(bool v) {
  if (size_ % 8 == 0) bytes_.push_back(0);
  ++size_;
  set(size_ - 1, v);
}

void BitVector::append_bits(std::uint64_t value, unsigned width) {
  // Byte-aligned fast path for the common 8-bit code case.
  if (width == 8 && size_ % 8 == 0) {
    bytes_.push_back(static_cast<std::uint8_t>(value));
    size_ += 8;
    return;
  }
  for (unsigned b = width; b-- > 0;) push_back((value >> b) & 1U);
}

void BitVector::append(const BitVector& other) {
  if (size_ % 8 == 0) {
    bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
    size_ += other.size_;
    return;
  }
  for (std::size_t i = 0; i < other.size_; ++i) push_back(other[i]);
}

std::size_t BitVector::count_ones() const noexcept {
  std::size_t n = 0;
  for (auto b : bytes_) n += static_cast<std::size_t>(std::popcount(b));
  return n;
}

void BitVector::copy_words(std::size_t offset, std::size_t nbits, std::span<std::uint64_t> out) const {
  const std::size_t nwords = (nbits + 63) / 64;
  if (out.size() < nwords || offset + nbits > size_) throw DomainError("BitVector::copy_words: range out of bounds");
  std::fill_n(out.begin(), nwords, 0);
  if (offset % 8 == 0) {
    const std::size_t first = offset / 8;
    const std::size_t nbytes = (nbits + 7) / 8;
    for (std::size_t k = 0; k < nbytes; ++k)
      out[k / 8] |= static_cast<std::uint64_t>(bytes_[first + k]) << (56 - 8 * (k % 8));
  } else {
    for (std::size_t j = 0; j < nbits; ++j)
      if ((*this)[offset + j]) out[j / 64] |= 1ULL << (63 - j % 64);
  }
  if (nbits % 64 != 0) out[nwords - 1] &= ~0ULL << (64 - nbits % 64);
}

std::vector<std::uint8_t> BitVector::unpack() const {
  std::vector<std::uint8_t> bits(size_);
  for (std::size_t i = 0; i < size_; ++i) bits[i] = (*this)[i];
  return bits;
}

BitVector BitVector::slice(std::size_t offset, std::size_t nbits) const {
  if (offset + nbits > size_) throw DomainError("BitVector::slice: range out of bounds");
  if (offset % 8 == 0) return from_bytes(std::span(bytes_).subspan(offset / 8), nbits);
  BitVector v(nbits);
  for (std::size_t i = 0; i < nbits; ++i) v.set(i, (*this)[offset + i]);
  return v;
}

BitVector BitVector::operator^(const BitVector& other) const {
  if (other.size_ != size_) throw DomainError("BitVector xor: length mismatch");
  BitVector v = *this;
  for (std::size_t i = 0; i < bytes_.size(); ++i) v.bytes_[i] ^= other.bytes_[i];
  return v;
}

void write_bits_raw(const std::filesystem::path& path, const BitVector& bits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const auto b = bits.bytes();
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw Error("write failed: " + path.string());
}

BitVector read_bits_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return BitVector::from_bytes(bytes);
}

}  // namespace bhd
