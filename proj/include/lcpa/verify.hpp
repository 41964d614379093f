#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lcpa/bitstring.hpp"
#include "lcpa/conv.hpp"
#include "lcpa/partition.hpp"
#include "lcpa/toeplitz.hpp"

namespace lcpa {

// Randomized comparison of the partitioned fast path against hash_direct.

struct VerifyOptions {
  std::size_t n = std::size_t{1} << 16;
  std::size_t l = std::size_t{1} << 12;
  std::size_t trials = 50;
  std::uint64_t rng_seed = 1;
  std::vector<Precision> modes = {Precision::fp32, Precision::fp64, Precision::exact};
  std::optional<std::pair<std::size_t, std::size_t>> corrupt;  // fault injection
};

struct VerifyMismatch {
  std::size_t trial = 0;
  std::size_t p = 0;
  std::size_t q = 0;
  Precision mode = Precision::fp32;
  std::optional<std::pair<std::size_t, std::size_t>> batch;  // (block, batch) of the bad key, if located
};

struct VerifyReport {
  std::size_t trials_run = 0;
  bool pass = true;
  std::optional<VerifyMismatch> mismatch;
  std::vector<std::string> warnings;
};

inline constexpr std::size_t verify_max_n = std::size_t{1} << 22;

inline VerifyReport run_verify(const VerifyOptions& opt) {
  if (opt.n < 1 || opt.n > verify_max_n) {
    throw ParameterError("n", "verification needs 1 <= n <= 2^22, got " + std::to_string(opt.n));
  }
  if (opt.l < 1 || opt.l > opt.n) throw ParameterError("l", "verification needs 1 <= l <= n");
  if (opt.modes.empty()) throw ParameterError("modes", "at least one precision mode is required");

  VerifyReport report;
  if (opt.trials == 0) {
    report.warnings.push_back("zero trials requested; nothing was checked");
    return report;
  }

  std::mt19937_64 rng(opt.rng_seed);
  for (std::size_t t = 0; t < opt.trials; ++t) {
    const BitString u = random_bits(opt.n, rng);
    const ToeplitzSeed seed(random_bits(opt.n + opt.l - 1, rng), opt.n, opt.l);
    const Precision mode = opt.modes[std::uniform_int_distribution<std::size_t>(0, opt.modes.size() - 1)(rng)];
    const PartitionPlan plan = plan_random(opt.n, opt.l, PrecisionPolicy::defaults(mode), rng);

    std::vector<IntermediateKey> keys;
    AmplifyOptions ao;
    ao.corrupt = opt.corrupt;
    ao.observer = [&](const IntermediateKey& k) { keys.push_back(k); };
    const BitString fast = amplify(u, seed, plan, ao);
    const BitString reference = hash_direct(u, seed);
    ++report.trials_run;
    if (fast == reference) continue;

    VerifyMismatch bad{t, plan.p, plan.q, mode, std::nullopt};
    for (const auto& k : keys) {
      const Extent in = plan.batches[k.block_index][k.batch_index];
      const Extent win = plan.seed_window(in);
      const ToeplitzSeed sub(slice(seed.bits(), win.offset, win.length), in.length, opt.l);
      if (hash_direct(slice(u, in.offset, in.length), sub) != k.parities) {
        bad.batch = std::make_pair(k.block_index, k.batch_index);
        break;
      }
    }
    report.pass = false;
    report.mismatch = bad;
    break;
  }
  return report;
}

}  // namespace lcpa
