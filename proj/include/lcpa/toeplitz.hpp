#pragma once

#include <bit>
#include <cstddef>
#include <string>
#include <vector>
#include <utility>

#include "lcpa/bitstring.hpp"
#include "lcpa/error.hpp"

namespace lcpa {

/// The n+l-1 random bits that define an n x l binary Toeplitz matrix.
///
/// Layout: entry(row, col) = bits[col - row + n - 1]. Bits [0, n-1] run up
/// the first column from the bottom row, bits [n-1, n+l-2] run along the
/// first row. With this layout u*T is exactly the window [n-1, n+l-1) of the
/// linear convolution of u with the seed bits.
class ToeplitzSeed {
 public:
  ToeplitzSeed() = default;

  ToeplitzSeed(BitString bits, std::size_t n, std::size_t l) : bits_(std::move(bits)), n_(n), l_(l) {
    if (n_ < 1) throw ParameterError("n", "Toeplitz input length must be >= 1");
    if (l_ < 1) throw ParameterError("l", "Toeplitz output length must be >= 1");
    if (bits_.size() != n_ + l_ - 1) {
      throw ShapeError("seed has " + std::to_string(bits_.size()) + " bits, n + l - 1 = " +
                       std::to_string(n_ + l_ - 1));
    }
  }

  const BitString& bits() const noexcept { return bits_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t l() const noexcept { return l_; }

  friend bool operator==(const ToeplitzSeed&, const ToeplitzSeed&) = default;

 private:
  BitString bits_;
  std::size_t n_ = 0;
  std::size_t l_ = 0;
};

inline bool toeplitz_entry(const ToeplitzSeed& seed, std::size_t row, std::size_t col) {
  if (row >= seed.n() || col >= seed.l()) {
    throw RangeError("entry(" + std::to_string(row) + ", " + std::to_string(col) + ") outside " +
                     std::to_string(seed.n()) + " x " + std::to_string(seed.l()) + " matrix");
  }
  return seed.bits().test(col + (seed.n() - 1) - row);
}

// Reference u*T mod 2, O(n*l). Column c is the inner product of reversed u
// with seed bits [c, c+n); the only speedup is doing 64 products per word.
inline BitString hash_direct(const BitString& u, const ToeplitzSeed& seed) {
  if (u.size() != seed.n()) {
    throw ShapeError("input has " + std::to_string(u.size()) + " bits, matrix expects " +
                     std::to_string(seed.n()));
  }
  const std::size_t n = seed.n();
  BitString reversed(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (u.test(r)) reversed.set(n - 1 - r, true);
  }
  const auto rev_words = reversed.words();
  const std::size_t nw = rev_words.size();

  // Seed words plus one zero word so the shifted reads need no bounds check.
  std::vector<BitString::word_type> t(seed.bits().words().begin(), seed.bits().words().end());
  t.push_back(0);

  BitString out(seed.l());
  for (std::size_t c = 0; c < seed.l(); ++c) {
    const std::size_t w0 = c / BitString::word_bits;
    const unsigned shift = c % BitString::word_bits;
    const BitString::word_type* src = t.data() + w0;
    const std::size_t avail = std::min(nw, t.size() - 1 - w0);
    BitString::word_type acc = 0;
    if (shift == 0) {
      for (std::size_t k = 0; k < avail; ++k) acc ^= rev_words[k] & src[k];
    } else {
      for (std::size_t k = 0; k < avail; ++k) {
        acc ^= rev_words[k] & ((src[k] >> shift) | (src[k + 1] << (BitString::word_bits - shift)));
      }
    }
    if (std::popcount(acc) & 1) out.set(c, true);
  }
  return out;
}

}  // namespace lcpa
