#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lcpa/bitstring.hpp"
#include "lcpa/error.hpp"
#include "lcpa/fft.hpp"
#include "lcpa/ntt.hpp"
#include "lcpa/parallel.hpp"

namespace lcpa {

enum class Precision { fp32, fp64, exact };

inline std::string_view to_string(Precision p) {
  switch (p) {
    case Precision::fp32: return "single";
    case Precision::fp64: return "double";
    case Precision::exact: return "exact";
  }
  return "?";
}

inline Precision parse_precision(std::string_view text) {
  if (text == "single") return Precision::fp32;
  if (text == "double") return Precision::fp64;
  if (text == "exact") return Precision::exact;
  throw ParameterError("precision", "expected single, double or exact, got '" + std::string(text) + "'");
}

inline std::optional<Precision> escalation(Precision p) {
  switch (p) {
    case Precision::fp32: return Precision::fp64;
    case Precision::fp64: return Precision::exact;
    case Precision::exact: return std::nullopt;
  }
  return std::nullopt;
}

// Largest transform (in points) each backend accepts.
inline constexpr std::size_t transform_cap(Precision p) {
  switch (p) {
    case Precision::fp32: return std::size_t{1} << 23;
    case Precision::fp64: return std::size_t{1} << 26;
    case Precision::exact: return std::size_t{1} << 27;
  }
  return 0;
}

// Upper bound accepted for PrecisionPolicy::max_batch_bits.
inline constexpr std::size_t batch_bits_limit(Precision p) {
  switch (p) {
    case Precision::fp32: return std::size_t{1} << 23;
    case Precision::fp64: return std::size_t{1} << 26;
    case Precision::exact: return std::size_t{1} << 26;
  }
  return 0;
}

struct PrecisionPolicy {
  Precision mode = Precision::fp32;
  std::size_t max_batch_bits = std::size_t{4} << 20;
  double round_guard = 0.25;

  static PrecisionPolicy defaults(Precision mode) {
    PrecisionPolicy p;
    p.mode = mode;
    p.max_batch_bits = mode == Precision::fp32 ? (std::size_t{4} << 20) : (std::size_t{1} << 25);
    return p;
  }

  std::size_t max_transform() const noexcept { return transform_cap(mode); }

  void validate() const {
    if (max_batch_bits < 1) throw ParameterError("max_batch_bits", "must be >= 1");
    if (max_batch_bits > batch_bits_limit(mode)) {
      throw ParameterError("max_batch_bits", std::to_string(max_batch_bits) + " exceeds the " +
                                                 std::string(to_string(mode)) + " limit of " +
                                                 std::to_string(batch_bits_limit(mode)));
    }
    if (!(round_guard > 0 && round_guard < 0.5)) throw ParameterError("round_guard", "must lie in (0, 0.5)");
  }
};

class PrecisionError : public Error {
 public:
  PrecisionError(Precision mode, double residual, double guard, bool inconsistent)
      : Error(ErrorKind::precision, describe(mode, residual, guard, inconsistent)),
        mode_(mode),
        residual_(residual),
        guard_(guard),
        inconsistent_(inconsistent) {}

  Precision mode() const noexcept { return mode_; }
  double residual() const noexcept { return residual_; }
  double guard() const noexcept { return guard_; }
  bool inconsistent() const noexcept { return inconsistent_; }
  std::optional<Precision> escalate_to() const noexcept { return escalation(mode_); }

 private:
  static std::string describe(Precision mode, double residual, double guard, bool inconsistent) {
    std::string msg = std::string(to_string(mode)) + " transform residual " + std::to_string(residual);
    msg += inconsistent ? " with inconsistent rounding" : " >= guard " + std::to_string(guard);
    if (auto next = escalation(mode)) {
      msg += "; escalate to " + std::string(to_string(*next)) + " or shrink the batch";
    }
    return msg;
  }

  Precision mode_;
  double residual_;
  double guard_;
  bool inconsistent_;
};

struct ConvResult {
  BitString parities;
  double max_residual = 0;  // float backends only
};

// Two scratch buffers reused across convolutions. One workspace serves one
// convolution at a time; keeping it across batches saves re-faulting the
// transform buffers for every batch.
struct ConvWorkspace {
  fft::Scratch first;
  fft::Scratch second;
};

namespace detail {

// Popcount over bit ranges in O(1) after an O(n/64) word-prefix pass.
class BitPrefix {
 public:
  explicit BitPrefix(const BitString& s) : bits_(s), prefix_(s.words().size() + 1, 0) {
    for (std::size_t k = 0; k < s.words().size(); ++k) {
      prefix_[k + 1] = prefix_[k] + static_cast<std::uint64_t>(std::popcount(s.words()[k]));
    }
  }

  // Number of set bits in [0, x).
  std::uint64_t upto(std::size_t x) const noexcept {
    const std::size_t w = x / BitString::word_bits;
    const unsigned r = x % BitString::word_bits;
    std::uint64_t c = prefix_[w];
    if (r != 0) c += static_cast<std::uint64_t>(std::popcount(bits_.words()[w] & ((BitString::word_type{1} << r) - 1)));
    return c;
  }

  std::uint64_t count(std::size_t lo, std::size_t hi) const noexcept { return upto(hi) - upto(lo); }

 private:
  const BitString& bits_;
  std::vector<std::uint64_t> prefix_;
};

// Writes +1/-1 for set/clear bits and zero padding up to n. Inputs longer
// than n are folded cyclically; the window sizing keeps the folded terms out
// of the positions that are read back.
template <typename Real>
void load_centered(const BitString& s, Real* out, std::size_t n) {
  const auto words = s.words();
  const std::size_t head = std::min(s.size(), n);
  std::size_t i = 0;
  for (std::size_t k = 0; k < words.size() && i < head; ++k) {
    const std::size_t end = std::min(head, i + BitString::word_bits);
    BitString::word_type w = words[k];
    for (; i < end; ++i, w >>= 1) out[i] = static_cast<Real>(static_cast<int>(w & 1u) * 2 - 1);
  }
  std::fill(out + head, out + n, Real(0));
  for (std::size_t j = n; j < s.size(); ++j) out[j % n] += s.test(j) ? Real(1) : Real(-1);
}

inline void load_binary(const BitString& s, std::uint32_t* out, std::size_t n) {
  const auto words = s.words();
  const std::size_t head = std::min(s.size(), n);
  std::size_t i = 0;
  for (std::size_t k = 0; k < words.size() && i < head; ++k) {
    const std::size_t end = std::min(head, i + BitString::word_bits);
    BitString::word_type w = words[k];
    for (; i < end; ++i, w >>= 1) out[i] = static_cast<std::uint32_t>(w & 1u);
  }
  std::fill(out + head, out + n, 0u);
  for (std::size_t j = n; j < s.size(); ++j) out[j % n] += s.test(j) ? 1u : 0u;
}

// The float path convolves the +/-1 images of a and b. Per output t with K
// overlapping index pairs, A ones of a and B ones of b in the overlap:
//   S = 4C - 2A - 2B + K
// where C is the true count of (1,1) pairs. Centering keeps the transform's
// dynamic range near sqrt(N) instead of N, and S + 2A + 2B - K must be a
// multiple of four, which catches any rounding slip up to 3.5.
template <typename Real>
ConvResult window_float(const BitString& a, const BitString& b, std::size_t lo, std::size_t len,
                        std::size_t transform, Precision mode, double guard, ConvWorkspace& ws) {
  using Complex = typename fft::Api<Real>::complex;
  const auto& plan = fft::Plan<Real>::cached(transform);
  Real* x = ws.first.get<Real>(fft::inplace_reals(transform));
  Real* y = ws.second.get<Real>(fft::inplace_reals(transform));

  load_centered(a, x, transform);
  load_centered(b, y, transform);
  plan.forward(x);
  plan.forward(y);

  const Real scale = Real(1) / static_cast<Real>(transform);
  auto* p = reinterpret_cast<Complex*>(x);
  const auto* q = reinterpret_cast<const Complex*>(y);
  for (std::size_t k = 0; k < transform / 2 + 1; ++k) {
    const Real re = p[k][0] * q[k][0] - p[k][1] * q[k][1];
    const Real im = p[k][0] * q[k][1] + p[k][1] * q[k][0];
    p[k][0] = re * scale;
    p[k][1] = im * scale;
  }
  plan.backward(x);

  const BitPrefix pa(a), pb(b);
  const std::size_t na = a.size(), nb = b.size();
  ConvResult out{BitString(len), 0.0};
  bool inconsistent = false;
  for (std::size_t j = 0; j < len; ++j) {
    const std::size_t t = lo + j;
    const std::size_t i_lo = t + 1 >= nb ? t + 1 - nb : 0;
    const std::size_t i_hi = std::min(na - 1, t);
    const auto overlap = static_cast<std::int64_t>(i_hi - i_lo + 1);
    const auto ones_a = static_cast<std::int64_t>(pa.count(i_lo, i_hi + 1));
    const auto ones_b = static_cast<std::int64_t>(pb.count(t - i_hi, t - i_lo + 1));

    const double s = static_cast<double>(x[t]);
    const double rounded = std::nearbyint(s);
    out.max_residual = std::max(out.max_residual, std::fabs(s - rounded));
    const std::int64_t v = static_cast<std::int64_t>(rounded) + 2 * ones_a + 2 * ones_b - overlap;
    if (v < 0 || (v & 3) != 0) {
      inconsistent = true;
      continue;
    }
    if ((v >> 2) & 1) out.parities.set(j, true);
  }
  if (inconsistent || out.max_residual >= guard) {
    throw PrecisionError(mode, out.max_residual, guard, inconsistent);
  }
  return out;
}

inline ConvResult window_exact(const BitString& a, const BitString& b, std::size_t lo, std::size_t len,
                               std::size_t transform, ConvWorkspace& ws) {
  const std::span<std::uint32_t> x(ws.first.get<std::uint32_t>(transform), transform);
  const std::span<std::uint32_t> y(ws.second.get<std::uint32_t>(transform), transform);
  load_binary(a, x.data(), transform);
  load_binary(b, y.data(), transform);
  ntt::transform(x, false);
  ntt::transform(y, false);
  for (std::size_t k = 0; k < transform; ++k) x[k] = ntt::mul_mod(x[k], y[k]);
  ntt::transform(x, true);

  ConvResult out{BitString(len), 0.0};
  for (std::size_t j = 0; j < len; ++j) {
    if (x[lo + j] & 1u) out.parities.set(j, true);
  }
  return out;
}

}  // namespace detail

// Smallest power-of-two cyclic transform whose wrap-around leaves positions
// [lo, lo+len) of the linear convolution of lengths na and nb untouched.
inline std::size_t window_transform_size(std::size_t na, std::size_t nb, std::size_t lo, std::size_t len) {
  const std::size_t full = na + nb - 1;
  return std::bit_ceil(std::max<std::size_t>({lo + len, full - lo, 1}));
}

// Parities of linear-convolution positions [lo, lo+len) of a and b.
inline ConvResult conv_window_parity(const BitString& a, const BitString& b, std::size_t lo, std::size_t len,
                                     const PrecisionPolicy& policy, ConvWorkspace* workspace = nullptr) {
  if (a.empty() || b.empty()) throw ContractError("convolution of an empty bit string");
  const std::size_t full = a.size() + b.size() - 1;
  if (lo > full || len > full - lo) {
    throw RangeError("window [" + std::to_string(lo) + ", " + std::to_string(lo + len) +
                     ") outside convolution of length " + std::to_string(full));
  }
  if (!(policy.round_guard > 0 && policy.round_guard < 0.5)) {
    throw ParameterError("round_guard", "must lie in (0, 0.5)");
  }
  const std::size_t transform = window_transform_size(a.size(), b.size(), lo, len);
  if (transform > policy.max_transform()) {
    throw PlanError("transform of " + std::to_string(transform) + " points exceeds the " +
                    std::string(to_string(policy.mode)) + " cap of " + std::to_string(policy.max_transform()));
  }
  ConvWorkspace local;
  ConvWorkspace& ws = workspace != nullptr ? *workspace : local;
  switch (policy.mode) {
    case Precision::fp32:
      return detail::window_float<float>(a, b, lo, len, transform, policy.mode, policy.round_guard, ws);
    case Precision::fp64:
      return detail::window_float<double>(a, b, lo, len, transform, policy.mode, policy.round_guard, ws);
    case Precision::exact:
      return detail::window_exact(a, b, lo, len, transform, ws);
  }
  throw ContractError("unknown precision mode");
}

inline ConvResult conv_parity(const BitString& a, const BitString& b, const PrecisionPolicy& policy) {
  if (a.empty() || b.empty()) throw ContractError("convolution of an empty bit string");
  return conv_window_parity(a, b, 0, a.size() + b.size() - 1, policy);
}

// Full parity convolution through the floating-point transform.
inline ConvResult conv_parity_float(const BitString& a, const BitString& b, const PrecisionPolicy& policy) {
  if (policy.mode == Precision::exact) throw ContractError("conv_parity_float needs mode single or double");
  return conv_parity(a, b, policy);
}

// Full parity convolution through the modular transform; no rounding.
inline ConvResult conv_parity_exact(const BitString& a, const BitString& b) {
  return conv_parity(a, b, PrecisionPolicy::defaults(Precision::exact));
}

// Maps conv_parity over the pairs on `workers` threads. Output order follows
// input order; the first failing pair aborts the batch and is re-thrown as
// IndexedFailure carrying its index.
inline std::vector<ConvResult> batch_conv_parity(std::span<const std::pair<BitString, BitString>> pairs,
                                                 const PrecisionPolicy& policy,
                                                 std::size_t workers = default_workers()) {
  std::vector<ConvResult> results(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    results[i] = conv_parity(pairs[i].first, pairs[i].second, policy);
  });
  return results;
}

}  // namespace lcpa
