// Hash a random 1 Mbit weak key to 100 kbit, once through the batched
// pipeline and once with the reference product, and compare.

#include <iostream>
#include <random>

#include "lcpa/lcpa.hpp"

int main() {
  const std::size_t n = std::size_t{1} << 20;
  const std::size_t l = n / 10;

  std::mt19937_64 rng(2024);
  const lcpa::BitString weak = lcpa::random_bits(n, rng);
  const lcpa::ToeplitzSeed seed = lcpa::generate_seed(n, l);

  lcpa::PipelineOptions opt;
  opt.max_batch_bits = n / 4;
  const lcpa::PipelineResult r = lcpa::run_pipeline(weak, seed, opt);

  std::cout << "p=" << r.plan.p << " q=" << r.plan.q << " batches=" << r.plan.batch_count()
            << " precision=" << lcpa::to_string(r.plan.policy.mode) << "\n";
  std::cout << "hashed " << n << " bits to " << r.key.size() << " in " << r.seconds * 1e3 << " ms\n";

  const bool same = r.key == lcpa::hash_direct(weak, seed);
  std::cout << (same ? "matches direct product" : "MISMATCH") << "\n";
  return same ? 0 : 1;
}
