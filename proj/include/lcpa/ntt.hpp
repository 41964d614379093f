#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace lcpa::ntt {

// p = 3 * 2^30 + 1 is prime with primitive root 5, so power-of-two
// transforms up to 2^30 points exist. Convolution counts of two bit strings
// never exceed the shorter length (< 2^27 here), far below p.
inline constexpr std::uint32_t modulus = 3221225473u;
inline constexpr std::uint32_t primitive_root = 5;
inline constexpr unsigned max_log2_size = 30;

inline std::uint32_t mul_mod(std::uint32_t a, std::uint32_t b) noexcept {
  return static_cast<std::uint32_t>(std::uint64_t{a} * b % modulus);
}

inline std::uint32_t add_mod(std::uint32_t a, std::uint32_t b) noexcept {
  const std::uint64_t s = std::uint64_t{a} + b;
  return static_cast<std::uint32_t>(s >= modulus ? s - modulus : s);
}

inline std::uint32_t sub_mod(std::uint32_t a, std::uint32_t b) noexcept {
  return a >= b ? a - b : static_cast<std::uint32_t>(std::uint64_t{a} + modulus - b);
}

inline std::uint32_t pow_mod(std::uint32_t base, std::uint64_t exp) noexcept {
  std::uint32_t result = 1;
  while (exp != 0) {
    if (exp & 1) result = mul_mod(result, base);
    base = mul_mod(base, base);
    exp >>= 1;
  }
  return result;
}

// In-place radix-2 transform; size must be a power of two <= 2^30. The
// inverse includes the 1/N scaling.
inline void transform(std::span<std::uint32_t> a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  std::vector<std::uint32_t> twiddle(n / 2);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    std::uint32_t root = pow_mod(primitive_root, (modulus - 1) / len);
    if (inverse) root = pow_mod(root, modulus - 2);
    const std::size_t half = len / 2;
    twiddle[0] = 1;
    for (std::size_t k = 1; k < half; ++k) twiddle[k] = mul_mod(twiddle[k - 1], root);

    for (std::size_t start = 0; start < n; start += len) {
      std::uint32_t* lo = a.data() + start;
      std::uint32_t* hi = lo + half;
      for (std::size_t k = 0; k < half; ++k) {
        const std::uint32_t v = mul_mod(hi[k], twiddle[k]);
        hi[k] = sub_mod(lo[k], v);
        lo[k] = add_mod(lo[k], v);
      }
    }
  }

  if (inverse) {
    const std::uint32_t n_inv = pow_mod(static_cast<std::uint32_t>(n % modulus), modulus - 2);
    for (auto& x : a) x = mul_mod(x, n_inv);
  }
}

}  // namespace lcpa::ntt
