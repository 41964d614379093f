#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "lcpa/error.hpp"

namespace lcpa {

// Security bookkeeping for a finite block of n weak-key bits. Everything is
// evaluated in long double, the widest native type.

struct FiniteSizeParams {
  std::uint64_t dim_hx = 2;   // dimension of the raw key's Hilbert space
  long double eps_bar = 1e-10L;  // smoothing parameter
  long double eps_pa = 1e-10L;   // privacy amplification failure probability
  std::uint64_t n = 1;        // input block length in bits

  void validate() const {
    if (dim_hx < 1) throw ParameterError("dim_hx", "must be >= 1");
    if (!(eps_bar > 0 && eps_bar < 1)) {
      throw ParameterError("eps_bar", "must lie in (0,1), got " + std::to_string(static_cast<double>(eps_bar)));
    }
    if (!(eps_pa > 0 && eps_pa < 1)) {
      throw ParameterError("eps_pa", "must lie in (0,1), got " + std::to_string(static_cast<double>(eps_pa)));
    }
    if (n < 1) throw ParameterError("n", "must be >= 1");
  }
};

struct RateInputs {
  long double beta = 1;  // reconciliation efficiency
  long double i_xy = 0;  // mutual information, bits/symbol
  long double s_ye = 0;  // Holevo bound, bits/symbol
};

struct KeyRateResult {
  long double beta = 0;
  long double i_xy = 0;
  long double s_ye = 0;
  long double delta_n = 0;
  long double k = 0;
  std::uint64_t l = 0;
};

// Finite-size penalty:
//   (2 dim_hx + 3) sqrt(log2(2/eps_bar) / n) + (2/n) log2(1/eps_pa)
inline long double compute_delta(const FiniteSizeParams& p) {
  p.validate();
  const long double n = static_cast<long double>(p.n);
  const long double spread = 2.0L * static_cast<long double>(p.dim_hx) + 3.0L;
  return spread * std::sqrt(std::log2(2.0L / p.eps_bar) / n) + (2.0L / n) * std::log2(1.0L / p.eps_pa);
}

// beta * I(x:y) - S(y:E) - delta. Negative results are returned as-is.
inline long double compute_key_rate(long double beta, long double i_xy, long double s_ye, long double delta_n) {
  if (!(beta > 0 && beta <= 1)) throw ParameterError("beta", "must lie in (0,1]");
  if (!(i_xy >= 0)) throw ParameterError("i_xy", "must be >= 0");
  if (!(s_ye >= 0)) throw ParameterError("s_ye", "must be >= 0");
  if (!(delta_n >= 0)) throw ParameterError("delta_n", "must be >= 0");
  return beta * i_xy - s_ye - delta_n;
}

inline std::uint64_t output_length(std::uint64_t n, long double k) {
  if (n < 1) throw ParameterError("n", "must be >= 1");
  if (!(k > 0)) return 0;
  const long double l = std::floor(static_cast<long double>(n) * k);
  return static_cast<std::uint64_t>(l);
}

// n * 2^(1-m). The log2 value is carried on a 2^-32 grid: the integer part
// (1 - m) is exact, so shifting m by one shifts log2 by exactly one.
struct CollisionProbability {
  long double log2 = 0;
  long double value = 0;
};

inline CollisionProbability collision_probability(std::uint64_t n, std::uint64_t m) {
  if (n < 1) throw ParameterError("n", "must be >= 1");
  if (m < 1) throw ParameterError("m", "must be >= 1");
  constexpr long double grid = 4294967296.0L;  // 2^32
  const long double log2n = std::nearbyint(std::log2(static_cast<long double>(n)) * grid) / grid;
  CollisionProbability out;
  out.log2 = log2n + (1.0L - static_cast<long double>(m));
  out.value = std::exp2(out.log2);
  return out;
}

inline KeyRateResult evaluate_key_rate(const FiniteSizeParams& p, const RateInputs& r) {
  KeyRateResult out;
  out.beta = r.beta;
  out.i_xy = r.i_xy;
  out.s_ye = r.s_ye;
  out.delta_n = compute_delta(p);
  out.k = compute_key_rate(r.beta, r.i_xy, r.s_ye, out.delta_n);
  out.l = output_length(p.n, out.k);
  return out;
}

// Smallest n in [1, max_n] with a positive key rate, found by bisection over
// the monotone delta. nullopt when even max_n yields k <= 0.
inline std::optional<std::uint64_t> smallest_positive_n(FiniteSizeParams p, const RateInputs& r,
                                                        std::uint64_t max_n = std::uint64_t{1} << 62) {
  auto positive = [&](std::uint64_t n) {
    p.n = n;
    return compute_key_rate(r.beta, r.i_xy, r.s_ye, compute_delta(p)) > 0;
  };
  if (!positive(max_n)) return std::nullopt;
  std::uint64_t lo = 0, hi = max_n;  // positive(hi), !positive(lo) or lo == 0
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (positive(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace lcpa
