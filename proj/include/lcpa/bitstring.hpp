#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcpa/error.hpp"

namespace lcpa {

// Packed binary vector. Bit b lives in word b/64 at position b%64, which on
// the wire becomes byte b/8, position b%8 (LSB first). Bits past size() are
// always zero, so equality is a plain word compare.
class BitString {
 public:
  using word_type = std::uint64_t;
  static constexpr std::size_t word_bits = 64;

  BitString() = default;
  explicit BitString(std::size_t nbits) : size_(nbits), words_(word_count(nbits), 0) {}

  // "10110" -> bit 0 = 1, bit 1 = 0, ...
  static BitString from_string(std::string_view text) {
    BitString s(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '1') {
        s.set(i, true);
      } else if (text[i] != '0') {
        throw ContractError("bit string literal contains '" + std::string(1, text[i]) + "'");
      }
    }
    return s;
  }

  // Reads ceil(nbits/8) bytes; padding bits of the final byte must be zero.
  static BitString from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits) {
    const std::size_t need = (nbits + 7) / 8;
    if (bytes.size() < need) {
      throw ParseError(bytes.size(), "need " + std::to_string(need) + " bytes for " +
                                         std::to_string(nbits) + " bits");
    }
    BitString s(nbits);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(s.words_.data(), bytes.data(), need);
    } else {
      for (std::size_t i = 0; i < need; ++i) {
        s.words_[i / 8] |= word_type{bytes[i]} << (8 * (i % 8));
      }
    }
    if (nbits % 8 != 0 && (bytes[need - 1] >> (nbits % 8)) != 0) {
      throw ParseError(need - 1, "non-zero padding bits in final byte");
    }
    return s;
  }

  std::vector<std::uint8_t> to_bytes() const {
    std::vector<std::uint8_t> out((size_ + 7) / 8);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), words_.data(), out.size());
    } else {
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (8 * (i % 8)));
      }
    }
    return out;
  }

  std::string to_string() const {
    std::string out(size_, '0');
    for (std::size_t i = 0; i < size_; ++i) {
      if (test(i)) out[i] = '1';
    }
    return out;
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool test(std::size_t i) const noexcept { return (words_[i / word_bits] >> (i % word_bits)) & 1u; }
  bool operator[](std::size_t i) const noexcept { return test(i); }

  void set(std::size_t i, bool value) noexcept {
    const word_type mask = word_type{1} << (i % word_bits);
    if (value) {
      words_[i / word_bits] |= mask;
    } else {
      words_[i / word_bits] &= ~mask;
    }
  }

  void flip(std::size_t i) noexcept { words_[i / word_bits] ^= word_type{1} << (i % word_bits); }

  std::span<const word_type> words() const noexcept { return words_; }

  // Mutable word access; callers must keep bits past size() clear, or call
  // clear_tail() afterwards.
  std::span<word_type> mutable_words() noexcept { return words_; }

  void clear_tail() noexcept {
    if (size_ % word_bits != 0) {
      words_.back() &= (word_type{1} << (size_ % word_bits)) - 1;
    }
  }

  // 64 bits starting at bit `offset`; bits beyond size() read as zero.
  word_type word_at(std::size_t offset) const noexcept {
    const std::size_t w = offset / word_bits;
    const unsigned shift = offset % word_bits;
    if (w >= words_.size()) return 0;
    word_type lo = words_[w] >> shift;
    if (shift != 0 && w + 1 < words_.size()) {
      lo |= words_[w + 1] << (word_bits - shift);
    }
    return lo;
  }

  std::size_t popcount() const noexcept {
    std::size_t total = 0;
    for (word_type w : words_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
  }

  BitString& operator^=(const BitString& other) {
    if (other.size_ != size_) {
      throw ShapeError("xor of " + std::to_string(size_) + "-bit and " +
                       std::to_string(other.size_) + "-bit strings");
    }
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
    return *this;
  }

  friend BitString operator^(BitString a, const BitString& b) { return a ^= b; }

  friend bool operator==(const BitString& a, const BitString& b) noexcept {
    return a.size_ == b.size_ && a.words_ == b.words_;
  }

  static std::size_t word_count(std::size_t nbits) noexcept { return (nbits + word_bits - 1) / word_bits; }

 private:
  std::size_t size_ = 0;
  std::vector<word_type> words_;
};

inline BitString slice(const BitString& s, std::size_t offset, std::size_t len) {
  if (offset > s.size() || len > s.size() - offset) {
    throw RangeError("slice(offset=" + std::to_string(offset) + ", len=" + std::to_string(len) +
                     ") of " + std::to_string(s.size()) + "-bit string");
  }
  BitString out(len);
  auto dst = out.mutable_words();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    dst[k] = s.word_at(offset + k * BitString::word_bits);
  }
  out.clear_tail();
  return out;
}

inline BitString zero_extend(const BitString& s, std::size_t new_len) {
  if (new_len < s.size()) {
    throw ContractError("zero_extend to " + std::to_string(new_len) + " bits would truncate a " +
                        std::to_string(s.size()) + "-bit string");
  }
  BitString out(new_len);
  std::copy(s.words().begin(), s.words().end(), out.mutable_words().begin());
  return out;
}

inline BitString concat(std::span<const BitString> parts) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  BitString out(total);
  std::size_t pos = 0;
  for (const auto& p : parts) {
    // Word-at-a-time splice: OR each source word in at the running offset.
    auto dst = out.mutable_words();
    for (std::size_t k = 0; k < p.words().size(); ++k) {
      const std::size_t bit = pos + k * BitString::word_bits;
      const unsigned shift = bit % BitString::word_bits;
      const std::size_t w = bit / BitString::word_bits;
      dst[w] |= p.words()[k] << shift;
      if (shift != 0 && w + 1 < dst.size()) dst[w + 1] |= p.words()[k] >> (BitString::word_bits - shift);
    }
    pos += p.size();
  }
  out.clear_tail();
  return out;
}

inline BitString xor_fold(std::span<const BitString> strings) {
  if (strings.empty()) throw ContractError("xor_fold of an empty sequence");
  BitString acc = strings.front();
  for (std::size_t i = 1; i < strings.size(); ++i) {
    if (strings[i].size() != acc.size()) {
      throw ShapeError("xor_fold element " + std::to_string(i) + " has " +
                       std::to_string(strings[i].size()) + " bits, expected " +
                       std::to_string(acc.size()));
    }
    acc ^= strings[i];
  }
  return acc;
}

// Fingerprint for reports and cross-run comparisons; not a security primitive.
inline std::uint64_t fingerprint(const BitString& s) {
  const auto bytes = s.to_bytes();
  const std::uint64_t h =
      std::hash<std::string_view>{}(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  return h ^ (s.size() * 0x9e3779b97f4a7c15ull);
}

template <typename Rng>
BitString random_bits(std::size_t nbits, Rng& rng) {
  BitString s(nbits);
  std::uniform_int_distribution<std::uint64_t> word;
  for (auto& w : s.mutable_words()) w = word(rng);
  s.clear_tail();
  return s;
}

}  // namespace lcpa
