#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lcpa/bitstring.hpp"
#include "lcpa/conv.hpp"
#include "lcpa/error.hpp"
#include "lcpa/parallel.hpp"
#include "lcpa/toeplitz.hpp"

namespace lcpa {

struct Extent {
  std::size_t offset = 0;
  std::size_t length = 0;

  std::size_t end() const noexcept { return offset + length; }
  friend bool operator==(const Extent&, const Extent&) = default;
};

// One batch, addressed by (block, batch) within a plan.
struct BatchRef {
  std::size_t block = 0;
  std::size_t batch = 0;
  Extent input;        // rows of T, i.e. bits of the weak key
  Extent seed_window;  // the sub-matrix's own n' + l - 1 seed bits
};

struct IntermediateKey {
  BitString parities;
  std::size_t block_index = 0;
  std::size_t batch_index = 0;
};

// Working-set model used by the planner, in bytes per transform point.
inline constexpr std::size_t bytes_per_point(Precision mode) {
  switch (mode) {
    case Precision::fp32: return 8;  // two in-place transform buffers
    case Precision::fp64: return 16;
    case Precision::exact: return 10;  // two residue arrays + twiddles
  }
  return 32;
}

// Transform points needed by one batch of m input bits and l output bits.
inline std::size_t batch_transform_size(std::size_t m, std::size_t l) {
  return window_transform_size(m, m + l - 1, m - 1, l);
}

inline std::size_t batch_working_bytes(std::size_t m, std::size_t l, Precision mode) {
  const std::size_t packed = (m + (m + l - 1) + 2 * l) / 8 + 64;
  return bytes_per_point(mode) * batch_transform_size(m, l) + packed;
}

// Weak key, seed, and the output accumulator; held for the whole run.
inline std::size_t resident_bytes(std::size_t n, std::size_t l) {
  return (n + 7) / 8 + (n + l - 1 + 7) / 8 + 2 * ((l + 7) / 8);
}

struct PartitionPlan {
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t p = 0;  // blocks
  std::size_t q = 0;  // batches per block
  std::vector<Extent> blocks;
  std::vector<std::vector<Extent>> batches;  // absolute input extents, per block
  PrecisionPolicy policy;

  std::size_t batch_count() const noexcept { return p * q; }

  // Seed bits feeding input rows [s, s+m): offset n - s - m, length m + l - 1.
  Extent seed_window(const Extent& input) const noexcept {
    return Extent{n - input.offset - input.length, input.length + l - 1};
  }

  std::size_t max_batch_length() const noexcept {
    std::size_t m = 0;
    for (const auto& blk : batches)
      for (const auto& b : blk) m = std::max(m, b.length);
    return m;
  }

  std::size_t max_transform_size() const { return batch_transform_size(max_batch_length(), l); }

  std::size_t peak_bytes() const {
    return resident_bytes(n, l) + q * batch_working_bytes(max_batch_length(), l, policy.mode);
  }

  std::vector<BatchRef> flatten() const {
    std::vector<BatchRef> out;
    out.reserve(batch_count());
    for (std::size_t i = 0; i < batches.size(); ++i) {
      for (std::size_t j = 0; j < batches[i].size(); ++j) {
        out.push_back(BatchRef{i, j, batches[i][j], seed_window(batches[i][j])});
      }
    }
    return out;
  }

  void validate() const {
    if (n < 1 || l < 1 || l > n) throw ParameterError("plan", "need 1 <= l <= n");
    if (p < 1 || q < 1 || blocks.size() != p || batches.size() != p) {
      throw ContractError("plan shape does not match p=" + std::to_string(p) + ", q=" + std::to_string(q));
    }
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < p; ++i) {
      if (blocks[i].offset != cursor || blocks[i].length == 0) {
        throw ContractError("block " + std::to_string(i) + " is not contiguous or is empty");
      }
      if (batches[i].size() != q) throw ContractError("block " + std::to_string(i) + " does not hold q batches");
      std::size_t inner = blocks[i].offset;
      for (std::size_t j = 0; j < q; ++j) {
        const Extent& b = batches[i][j];
        if (b.offset != inner || b.length == 0) {
          throw ContractError("batch (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") is not contiguous or is empty");
        }
        if (b.length > policy.max_batch_bits) {
          throw PlanError("batch (" + std::to_string(i) + ", " + std::to_string(j) + ") holds " +
                          std::to_string(b.length) + " bits, cap is " + std::to_string(policy.max_batch_bits));
        }
        if (batch_transform_size(b.length, l) > policy.max_transform()) {
          throw PlanError("batch (" + std::to_string(i) + ", " + std::to_string(j) + ") needs a " +
                          std::to_string(batch_transform_size(b.length, l)) + "-point transform, cap is " +
                          std::to_string(policy.max_transform()));
        }
        inner = b.end();
      }
      if (inner != blocks[i].end()) throw ContractError("batches do not cover block " + std::to_string(i));
      cursor = blocks[i].end();
    }
    if (cursor != n) throw ContractError("blocks do not cover the input");
  }
};

namespace detail {

// Equal shares of floor(len/count), the last one absorbing the remainder.
inline std::vector<Extent> split_even(std::size_t offset, std::size_t len, std::size_t count) {
  std::vector<Extent> out(count);
  const std::size_t base = len / count;
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = Extent{offset + k * base, base};
  }
  out.back().length = len - base * (count - 1);
  return out;
}

inline PartitionPlan build_plan(std::size_t n, std::size_t l, std::size_t p, std::size_t q,
                                const PrecisionPolicy& policy) {
  PartitionPlan plan;
  plan.n = n;
  plan.l = l;
  plan.p = p;
  plan.q = q;
  plan.policy = policy;
  plan.blocks = split_even(0, n, p);
  for (const auto& blk : plan.blocks) plan.batches.push_back(split_even(blk.offset, blk.length, q));
  return plan;
}

inline void check_lengths(std::size_t n, std::size_t l) {
  if (n < 1) throw ParameterError("n", "input length must be >= 1");
  if (l < 1) throw ParameterError("l", "output length must be >= 1");
  if (l > n) {
    throw ParameterError("l", "output length " + std::to_string(l) + " exceeds input length " + std::to_string(n));
  }
}

}  // namespace detail

/// Chooses the p x q decomposition for n input bits and l output bits.
///
/// The batch length m is the largest that respects the policy's batch cap
/// and keeps the batch transform within the backend's cap; the output
/// dimension is never split, so l must fit one transform on its own. q is
/// the number of batches whose working sets fit the memory budget together,
/// and p = ceil(batches / q).
inline PartitionPlan plan(std::size_t n, std::size_t l, std::size_t memory_budget, const PrecisionPolicy& policy) {
  detail::check_lengths(n, l);
  policy.validate();
  const std::size_t cap = policy.max_transform();
  if (l > cap) {
    throw PlanError("output of " + std::to_string(l) + " bits does not fit one " +
                    std::string(to_string(policy.mode)) + " transform of " + std::to_string(cap) + " points");
  }
  const std::size_t resident = resident_bytes(n, l);
  auto fits = [&](std::size_t m) {
    return resident <= memory_budget && batch_working_bytes(m, l, policy.mode) <= memory_budget - resident;
  };

  std::size_t m = std::min({n, policy.max_batch_bits, cap - l + 1});
  if (!fits(m)) {
    if (!fits(1)) {
      throw PlanError("memory budget of " + std::to_string(memory_budget) + " bytes cannot hold a single batch (needs " +
                      std::to_string(resident + batch_working_bytes(1, l, policy.mode)) + ")");
    }
    std::size_t lo = 1, hi = m;  // fits(lo), !fits(hi)
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      (fits(mid) ? lo : hi) = mid;
    }
    m = lo;
  }

  const std::size_t total = (n + m - 1) / m;
  const std::size_t concurrent = (memory_budget - resident) / batch_working_bytes(m, l, policy.mode);
  std::size_t q = std::clamp<std::size_t>(concurrent, 1, total);
  // A slightly smaller q often tiles the batches exactly (128 = 8 x 16
  // rather than 5 x 31).
  for (std::size_t cand = q, best = (total + q - 1) / q * q; cand >= std::max<std::size_t>(1, q / 2); --cand) {
    const std::size_t product = (total + cand - 1) / cand * cand;
    if (product < best) {
      best = product;
      q = cand;
    }
    if (cand == 1) break;
  }
  std::size_t p = (total + q - 1) / q;

  // The even split can leave the last batch a little longer than m; widen
  // the decomposition until every batch respects the cap.
  for (;;) {
    PartitionPlan candidate = detail::build_plan(n, l, p, q, policy);
    if (candidate.max_batch_length() <= m) {
      candidate.validate();
      return candidate;
    }
    if (q < concurrent && (q + 1) * p <= n) {
      ++q;
    } else {
      ++p;
    }
    if (p * q > n) throw PlanError("no even decomposition of " + std::to_string(n) + " bits found");
  }
}

// A plan with the caller's block and batch counts.
inline PartitionPlan plan_fixed(std::size_t n, std::size_t l, std::size_t p, std::size_t q,
                                const PrecisionPolicy& policy) {
  detail::check_lengths(n, l);
  policy.validate();
  if (p < 1 || q < 1) throw ParameterError("p, q", "block and batch counts must be >= 1");
  if (p > n || q > n / p) {
    throw PlanError(std::to_string(p) + " x " + std::to_string(q) + " batches do not fit " + std::to_string(n) +
                    " input bits");
  }
  PartitionPlan plan = detail::build_plan(n, l, p, q, policy);
  plan.validate();
  return plan;
}

// Random valid plan with up to 8 x 8 batches. Used by the verification
// harness to exercise many decompositions.
template <typename Rng>
PartitionPlan plan_random(std::size_t n, std::size_t l, const PrecisionPolicy& policy, Rng& rng) {
  detail::check_lengths(n, l);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const std::size_t p = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(n, 8))(rng);
    const std::size_t q = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(n / p, 8))(rng);
    PartitionPlan candidate = detail::build_plan(n, l, p, q, policy);
    try {
      candidate.validate();
      return candidate;
    } catch (const PlanError&) {
    }
  }
  throw PlanError("no random decomposition of " + std::to_string(n) + " bits satisfies the policy");
}

// u_slice times its Toeplitz sub-matrix: the window [m-1, m+l-1) of the
// parity convolution of the slice with its seed window.
inline IntermediateKey hash_batch(const BitString& u_slice, const BitString& seed_window, std::size_t l,
                                  const PrecisionPolicy& policy, ConvWorkspace* workspace = nullptr) {
  if (u_slice.empty() || l < 1) throw ContractError("hash_batch needs a non-empty slice and l >= 1");
  if (seed_window.size() != u_slice.size() + l - 1) {
    throw ShapeError("seed window has " + std::to_string(seed_window.size()) + " bits, slice of " +
                     std::to_string(u_slice.size()) + " with l = " + std::to_string(l) + " needs " +
                     std::to_string(u_slice.size() + l - 1));
  }
  ConvResult r = conv_window_parity(u_slice, seed_window, u_slice.size() - 1, l, policy, workspace);
  return IntermediateKey{std::move(r.parities), 0, 0};
}

class BatchError : public Error {
 public:
  BatchError(std::size_t block, std::size_t batch, ErrorKind kind, const std::string& cause)
      : Error(kind, "batch (" + std::to_string(block) + ", " + std::to_string(batch) + "): " + cause),
        block_(block),
        batch_(batch) {}

  std::size_t block() const noexcept { return block_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t block_;
  std::size_t batch_;
};

enum class Schedule {
  sequential,    // one batch at a time
  block_serial,  // blocks in order, batches of a block concurrently
  concurrent,    // any batch of any block may run at any time
};

struct AmplifyOptions {
  std::size_t workers = default_workers();
  Schedule schedule = Schedule::block_serial;
  // Sees every intermediate key before it is merged; calls are serialized.
  std::function<void(const IntermediateKey&)> observer;
  // Test hook: flip bit 0 of this (block, batch) key before merging.
  std::optional<std::pair<std::size_t, std::size_t>> corrupt;
};

/// Hashes u with the Toeplitz matrix of `seed` by running every batch of
/// the plan and XOR-merging the intermediate keys. The result does not
/// depend on the plan or on the schedule.
inline BitString amplify(const BitString& u, const ToeplitzSeed& seed, const PartitionPlan& plan,
                         const AmplifyOptions& options = {}) {
  if (u.size() != seed.n() || plan.n != seed.n() || plan.l != seed.l()) {
    throw ShapeError("input " + std::to_string(u.size()) + " bits, seed for " + std::to_string(seed.n()) + " x " +
                     std::to_string(seed.l()) + ", plan for " + std::to_string(plan.n) + " x " +
                     std::to_string(plan.l));
  }
  plan.validate();

  const std::vector<BatchRef> refs = plan.flatten();
  BitString key(plan.l);
  std::mutex merge_mu;
  std::mutex pool_mu;
  std::vector<std::unique_ptr<ConvWorkspace>> pool;

  auto run_one = [&](const BatchRef& ref) {
    std::unique_ptr<ConvWorkspace> ws;
    {
      std::lock_guard lock(pool_mu);
      if (!pool.empty()) {
        ws = std::move(pool.back());
        pool.pop_back();
      }
    }
    if (!ws) ws = std::make_unique<ConvWorkspace>();
    struct Return {
      std::mutex& mu;
      std::vector<std::unique_ptr<ConvWorkspace>>& pool;
      std::unique_ptr<ConvWorkspace>& ws;
      ~Return() {
        std::lock_guard lock(mu);
        pool.push_back(std::move(ws));
      }
    } give_back{pool_mu, pool, ws};
    try {
      IntermediateKey k = hash_batch(slice(u, ref.input.offset, ref.input.length),
                                     slice(seed.bits(), ref.seed_window.offset, ref.seed_window.length), plan.l,
                                     plan.policy, ws.get());
      k.block_index = ref.block;
      k.batch_index = ref.batch;
      if (options.corrupt && options.corrupt->first == ref.block && options.corrupt->second == ref.batch) {
        k.parities.flip(0);
      }
      std::lock_guard lock(merge_mu);
      if (options.observer) options.observer(k);
      key ^= k.parities;
    } catch (const Error& e) {
      throw BatchError(ref.block, ref.batch, e.kind(), e.what());
    } catch (const std::exception& e) {
      throw BatchError(ref.block, ref.batch, ErrorKind::contract, e.what());
    }
  };

  auto unwrap = [](const IndexedFailure& f) { std::rethrow_exception(f.cause()); };
  const std::size_t workers = options.schedule == Schedule::sequential ? 1 : std::min(options.workers, plan.q);

  try {
    if (options.schedule == Schedule::block_serial) {
      for (std::size_t i = 0; i < plan.p; ++i) {
        parallel_for(plan.q, workers, [&](std::size_t j) { run_one(refs[i * plan.q + j]); });
      }
    } else {
      parallel_for(refs.size(), workers, [&](std::size_t k) { run_one(refs[k]); });
    }
  } catch (const IndexedFailure& f) {
    unwrap(f);
  }
  return key;
}

}  // namespace lcpa
