#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lcpa/conv.hpp"
#include "lcpa/partition.hpp"
#include "lcpa/toeplitz.hpp"

namespace lcpa {

// Precision request for the drivers: a fixed backend, or nullopt for the
// cheapest backend whose caps admit the plan, escalating on PrecisionError.
struct PipelineOptions {
  std::optional<Precision> precision;
  std::optional<std::size_t> max_batch_bits;
  std::size_t memory_budget = std::size_t{2} << 30;
  AmplifyOptions amplify;
};

struct PipelineResult {
  BitString key;
  PartitionPlan plan;
  double seconds = 0;  // plan + transforms + merge
  std::vector<std::string> escalations;
};

inline PrecisionPolicy policy_for(Precision mode, std::optional<std::size_t> max_batch_bits) {
  PrecisionPolicy policy = PrecisionPolicy::defaults(mode);
  if (max_batch_bits) policy.max_batch_bits = *max_batch_bits;
  return policy;
}

// Plans with the requested backend, or walks single -> double -> exact when
// none was requested and returns the first feasible plan.
inline PartitionPlan plan_for(std::size_t n, std::size_t l, const PipelineOptions& opt,
                              std::optional<Precision> start = std::nullopt) {
  if (opt.precision) return plan(n, l, opt.memory_budget, policy_for(*opt.precision, opt.max_batch_bits));
  std::optional<Precision> mode = start.value_or(Precision::fp32);
  std::string reasons;
  while (mode) {
    try {
      PrecisionPolicy policy = policy_for(*mode, opt.max_batch_bits);
      return plan(n, l, opt.memory_budget, policy);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::plan && e.kind() != ErrorKind::parameter) throw;
      reasons += std::string(reasons.empty() ? "" : "; ") + e.what();
    }
    mode = escalation(*mode);
  }
  throw PlanError("no backend can plan " + std::to_string(n) + " x " + std::to_string(l) + ": " + reasons);
}

inline PipelineResult run_pipeline(const BitString& u, const ToeplitzSeed& seed, const PipelineOptions& opt) {
  PipelineResult result;
  const auto start = std::chrono::steady_clock::now();
  result.plan = plan_for(seed.n(), seed.l(), opt);
  for (;;) {
    try {
      result.key = amplify(u, seed, result.plan, opt.amplify);
      break;
    } catch (const BatchError& e) {
      const auto next = escalation(result.plan.policy.mode);
      if (opt.precision || e.kind() != ErrorKind::precision || !next) throw;
      result.escalations.push_back(e.what());
      result.plan = plan_for(seed.n(), seed.l(), opt, next);
    }
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace lcpa
