#pragma once

#include <sys/random.h>

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lcpa/bitstring.hpp"
#include "lcpa/error.hpp"
#include "lcpa/toeplitz.hpp"

namespace lcpa {

// Fills the span with random bytes or throws EntropyError. There is no
// fallback generator.
using EntropySource = std::function<void(std::span<std::uint8_t>)>;

// Kernel CSPRNG via getrandom(2).
inline void system_entropy(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    const ssize_t got = ::getrandom(out.data() + done, out.size() - done, 0);
    if (got < 0) {
      if (errno == EINTR) continue;
      throw EntropyError(std::string("getrandom failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(got);
  }
}

inline ToeplitzSeed generate_seed(std::size_t n, std::size_t l, const EntropySource& entropy = system_entropy) {
  if (n < 1 || l < 1) throw ParameterError("n, l", "seed dimensions must be >= 1");
  const std::size_t bits = n + l - 1;
  std::vector<std::uint8_t> bytes((bits + 7) / 8);
  entropy(bytes);
  if (bits % 8 != 0) bytes.back() &= static_cast<std::uint8_t>((1u << (bits % 8)) - 1);
  return ToeplitzSeed(BitString::from_bytes(bytes, bits), n, l);
}

}  // namespace lcpa
