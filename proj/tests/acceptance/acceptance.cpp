// Acceptance gate: one PASS/FAIL line per criterion.
//
//   lcpa_acceptance [--criterion N]...

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lcpa/lcpa.hpp"

using namespace lcpa;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ToeplitzSeed random_seed(std::size_t n, std::size_t l, std::mt19937_64& rng) {
  return ToeplitzSeed(random_bits(n + l - 1, rng), n, l);
}

const Precision all_modes[] = {Precision::fp32, Precision::fp64, Precision::exact};

// 1. Random plans against the direct product.
Outcome oracle_equivalence() {
  std::mt19937_64 rng(0xA1);
  const Schedule schedules[] = {Schedule::sequential, Schedule::block_serial, Schedule::concurrent};
  std::size_t mismatches = 0, trials = 1000;
  std::string first;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 1 << 16)(rng);
    const std::size_t l = std::uniform_int_distribution<std::size_t>(1, n)(rng);
    const ToeplitzSeed seed = random_seed(n, l, rng);
    const BitString u = random_bits(n, rng);
    const Precision mode = all_modes[t % 3];
    const PartitionPlan plan = plan_random(n, l, PrecisionPolicy::defaults(mode), rng);
    AmplifyOptions opt;
    opt.schedule = schedules[(t / 3) % 3];
    opt.workers = 4;
    if (amplify(u, seed, plan, opt) != hash_direct(u, seed)) {
      if (mismatches++ == 0) {
        first = " first at trial " + std::to_string(t) + " (n=" + std::to_string(n) + ", l=" + std::to_string(l) + ")";
      }
    }
  }
  return {mismatches == 0, std::to_string(trials) + " trials, " + std::to_string(mismatches) + " mismatches" + first};
}

// 2. Four fixed plans over n = 2^20.
Outcome plan_invariance() {
  std::mt19937_64 rng(0xA2);
  const std::size_t n = std::size_t{1} << 20, l = std::size_t{1} << 12;
  const std::pair<std::size_t, std::size_t> shapes[] = {{1, 1}, {2, 2}, {4, 1}, {1, 8}};
  std::vector<PartitionPlan> plans;
  for (auto [p, q] : shapes) plans.push_back(plan_fixed(n, l, p, q, PrecisionPolicy::defaults(Precision::fp32)));
  std::size_t bad = 0, oracle_bad = 0;
  for (int t = 0; t < 200; ++t) {
    const ToeplitzSeed seed = random_seed(n, l, rng);
    const BitString u = random_bits(n, rng);
    const BitString ref = amplify(u, seed, plans[0]);
    for (std::size_t k = 1; k < plans.size(); ++k) bad += amplify(u, seed, plans[k]) != ref;
    oracle_bad += hash_direct(u, seed) != ref;
  }
  return {bad == 0 && oracle_bad == 0, "200 trials x 4 plans (l=4096): " + std::to_string(bad) +
                                           " plan disagreements, " + std::to_string(oracle_bad) +
                                           " disagreements with the direct product"};
}

// 3. Every (u, seed) with n <= 8, l <= 4 through the convolution path.
Outcome exhaustive_small() {
  std::size_t cases = 0, bad = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t l = 1; l <= 4; ++l) {
      const std::size_t sbits = n + l - 1;
      for (std::uint64_t sv = 0; sv < (std::uint64_t{1} << sbits); ++sv) {
        BitString sb(sbits);
        for (std::size_t i = 0; i < sbits; ++i) sb.set(i, (sv >> i) & 1);
        const ToeplitzSeed seed(sb, n, l);
        for (std::uint64_t uv = 0; uv < (std::uint64_t{1} << n); ++uv) {
          BitString u(n);
          for (std::size_t i = 0; i < n; ++i) u.set(i, (uv >> i) & 1);
          BitString want(l);
          for (std::size_t c = 0; c < l; ++c) {
            bool acc = false;
            for (std::size_t r = 0; r < n; ++r) acc ^= u.test(r) && toeplitz_entry(seed, r, c);
            want.set(c, acc);
          }
          for (Precision m : all_modes) {
            ++cases;
            bad += hash_batch(u, sb, l, PrecisionPolicy::defaults(m)).parities != want;
          }
        }
      }
    }
  }
  return {bad == 0, std::to_string(cases) + " (u, seed, backend) cases, " + std::to_string(bad) + " mismatches"};
}

// 4. Double precision against the exact backend at 2^23..2^24-point transforms.
Outcome precision_contract() {
  std::mt19937_64 rng(0xA4);
  std::size_t trials = 0, bad = 0, typed = 0;
  double worst = 0;
  std::ostringstream sizes;
  for (int t = 0; t < 20; ++t) {
    const std::size_t N = std::size_t{1} << (t % 2 ? 24 : 23);
    // m + l - 1 in (N/2, N] puts the batch transform at exactly N points.
    const std::size_t m = std::uniform_int_distribution<std::size_t>(N / 16, N / 2)(rng);
    const std::size_t lo = N / 2 + 2 - m, hi = N + 1 - m;
    const std::size_t l = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    const BitString u = random_bits(m, rng);
    const BitString w = random_bits(m + l - 1, rng);
    if (batch_transform_size(m, l) != N) return {false, "test setup produced the wrong transform size"};
    ++trials;
    const BitString exact = hash_batch(u, w, l, PrecisionPolicy::defaults(Precision::exact)).parities;
    try {
      const ConvResult r = conv_window_parity(u, w, m - 1, l, PrecisionPolicy::defaults(Precision::fp64));
      worst = std::max(worst, r.max_residual);
      if (r.parities != exact || r.max_residual >= 0.25) ++bad;
    } catch (const PrecisionError& e) {
      ++typed;
      ++bad;
      worst = std::max(worst, e.residual());
    }
  }
  // The guard must turn into a typed error rather than a silent result.
  bool guard_typed = false;
  {
    const BitString u = random_bits(std::size_t{1} << 21, rng), w = random_bits(std::size_t{3} << 21, rng);
    PrecisionPolicy p = PrecisionPolicy::defaults(Precision::fp64);
    p.round_guard = 1e-12;
    try {
      conv_window_parity(u, w, u.size() - 1, std::size_t{1} << 22, p);
    } catch (const PrecisionError&) {
      guard_typed = true;
    }
  }
  std::ostringstream d;
  d << trials << " double-vs-exact trials at 2^23/2^24 points, " << bad << " failures (" << typed
    << " precision errors), max_residual " << worst << "; forced guard violation typed: "
    << (guard_typed ? "yes" : "no");
  return {bad == 0 && worst < 0.25 && guard_typed, d.str()};
}

// 5. Penalty term and collision bound.
Outcome finite_size_math() {
  const long double reference = 4.09547178828739546661553934335e-3L;
  const long double got = compute_delta(FiniteSizeParams{2, 1e-10L, 1e-10L, 100000000});
  const long double rel = std::fabs(got - reference) / reference;
  std::mt19937_64 rng(0xA5);
  int halving_ok = 0;
  for (int t = 0; t < 100; ++t) {
    const std::uint64_t n = rng() % (std::uint64_t{1} << 50) + 1;
    const std::uint64_t m = rng() % 1000000 + 1;
    halving_ok += collision_probability(n, m).log2 - collision_probability(n, m + 1).log2 == 1.0L;
  }
  std::ostringstream d;
  d.precision(17);
  d << "delta=" << static_cast<double>(got) << " rel.err=" << static_cast<double>(rel) << ", halving exact in "
    << halving_ok << "/100";
  return {rel <= 1e-9L && halving_ok == 100, d.str()};
}

// 6. Benchmark table shape, key agreement, batch-size sensitivity, 128 Mbit time.
Outcome table_structure() {
  BenchOptions opt;
  opt.sizes = {4 * mbit, 8 * mbit, 16 * mbit, 32 * mbit, 64 * mbit, 128 * mbit};
  opt.batch_bits = {1 * mbit, 2 * mbit, 4 * mbit};
  opt.key_ratio = 0.1;
  const auto rows = run_bench(opt, [](const BenchRow& r) {
    std::cerr << "  " << r.input_bits / mbit << " Mbit @ " << r.batch_bits / mbit << " Mbit: "
              << (r.feasible ? std::to_string(r.median_seconds) + " s, " + std::to_string(r.batches) + " batches, " +
                                   std::string(to_string(r.mode))
                             : "infeasible: " + r.note)
              << "\n";
  });
  write_table(std::cout, rows);

  bool all_feasible = true, keys_agree = true, ratio_ok = true, time_ok = true;
  std::ostringstream d;
  std::map<std::size_t, std::vector<const BenchRow*>> by_input;
  for (const auto& r : rows) {
    by_input[r.input_bits].push_back(&r);
    all_feasible &= r.feasible;
    if (r.input_bits == 128 * mbit) time_ok &= r.feasible && r.median_seconds < 300;
  }
  d << "ratios:";
  for (const auto& [n, rs] : by_input) {
    double lo = 1e300, hi = 0;
    for (const BenchRow* r : rs) {
      keys_agree &= r->key_fingerprint == rs.front()->key_fingerprint;
      lo = std::min(lo, r->gbps());
      hi = std::max(hi, r->gbps());
    }
    const double ratio = lo > 0 ? hi / lo : INFINITY;
    ratio_ok &= ratio < 3.0;
    d << " " << n / mbit << "Mb=" << std::setprecision(3) << ratio;
  }
  d << "; keys agree: " << (keys_agree ? "yes" : "no") << "; all rows feasible: " << (all_feasible ? "yes" : "no")
    << "; 128 Mbit under 300 s: " << (time_ok ? "yes" : "no");
  return {rows.size() == 18 && all_feasible && keys_agree && ratio_ok && time_ok, d.str()};
}

// 7. 1 Gbit under a 2 GiB budget, and a 64 Mbit two-plan agreement.
Outcome scale() {
  constexpr std::size_t budget = std::size_t{2} << 30;
  std::mt19937_64 rng(0xA7);
  const std::size_t n = std::size_t{1} << 30, l = std::size_t{1} << 20;
  std::ostringstream d;
  bool ok = true;
  {
    const BitString u = random_bits(n, rng);
    const ToeplitzSeed seed = random_seed(n, l, rng);
    PipelineOptions po;
    po.memory_budget = budget;
    const auto t0 = Clock::now();
    const PipelineResult r = run_pipeline(u, seed, po);
    d << "1 Gbit -> " << r.key.size() << " bits: p=" << r.plan.p << " q=" << r.plan.q << " "
      << to_string(r.plan.policy.mode) << " planned peak " << (r.plan.peak_bytes() >> 20) << " MiB, "
      << std::setprecision(4) << since(t0) << " s";
    ok &= r.key.size() == l && r.plan.peak_bytes() <= budget;

    // 64 Mbit prefix of the same data, one seed, two plans.
    const std::size_t np = std::size_t{64} << 20;
    const BitString prefix = slice(u, 0, np);
    const ToeplitzSeed ps = random_seed(np, l, rng);
    const PartitionPlan a = plan_for(np, l, po);
    const PartitionPlan b = plan_fixed(np, l, 3, 7, PrecisionPolicy::defaults(Precision::fp64));
    const bool agree = amplify(prefix, ps, a) == amplify(prefix, ps, b);
    d << "; 64 Mbit prefix, plans " << a.p << "x" << a.q << " and " << b.p << "x" << b.q << ": "
      << (agree ? "agree" : "DISAGREE");
    ok &= agree;
  }
  rusage ru{};
  ::getrusage(RUSAGE_SELF, &ru);
  const std::size_t peak = static_cast<std::size_t>(ru.ru_maxrss) * 1024;
  d << "; process peak RSS " << (peak >> 20) << " MiB";
  ok &= peak <= budget;
  return {ok, d.str()};
}

// Bob in a forked child, alice here; bob reports (outcome, key) over a pipe.
struct PairResult {
  SessionResult alice;
  wire::Outcome bob_outcome = wire::Outcome::aborted_no_key;
  BitString bob_key;
  bool ok = false;
};

PairResult two_process_session(const BitString& alice_key, const BitString& bob_key) {
  PairResult out;
  Listener listener(Endpoint::parse("127.0.0.1:0"));
  const Endpoint at{"127.0.0.1", listener.port()};
  int fds[2];
  if (::pipe(fds) != 0) return out;
  std::fflush(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) return out;
  auto config = [&](Role role) {
    SessionConfig c;
    c.role = role;
    c.n = alice_key.size();
    c.finite_size = FiniteSizeParams{2, 1e-10L, 1e-10L, c.n};
    c.rate = RateInputs{0.95L, 0.5L, 0.3L};
    c.confirm_tag_bits = 64;
    return c;
  };
  if (pid == 0) {
    ::close(fds[0]);
    int code = 1;
    try {
      Channel ch = connect_to(at);
      const SessionResult r = run_session(config(Role::bob), bob_key, ch);
      std::vector<std::uint8_t> msg = keyfile::encode(r.key);
      msg.insert(msg.begin(), static_cast<std::uint8_t>(r.transcript.outcome));
      std::size_t done = 0;
      while (done < msg.size()) {
        const ssize_t w = ::write(fds[1], msg.data() + done, msg.size() - done);
        if (w <= 0) break;
        done += static_cast<std::size_t>(w);
      }
      code = done == msg.size() ? 0 : 1;
    } catch (...) {
    }
    ::close(fds[1]);
    ::_exit(code);
  }
  ::close(fds[1]);
  try {
    Channel ch = listener.accept();
    out.alice = run_session(config(Role::alice), alice_key, ch);
  } catch (const std::exception& e) {
    std::cerr << "alice: " << e.what() << "\n";
  }
  std::vector<std::uint8_t> buf;
  std::uint8_t chunk[65536];
  for (;;) {
    const ssize_t r = ::read(fds[0], chunk, sizeof chunk);
    if (r <= 0) break;
    buf.insert(buf.end(), chunk, chunk + r);
  }
  ::close(fds[0]);
  int status = 0;
  ::waitpid(pid, &status, 0);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0 || buf.empty()) return out;
  out.bob_outcome = static_cast<wire::Outcome>(buf[0]);
  out.bob_key = keyfile::decode(std::span<const std::uint8_t>(buf).subspan(1));
  out.ok = true;
  return out;
}

// 8. Two processes over TCP.
Outcome session_round_trip() {
  std::mt19937_64 rng(0xA8);
  const std::size_t n = std::size_t{1} << 17;
  const BitString w = random_bits(n, rng);
  const PairResult same = two_process_session(w, w);
  const bool confirmed = same.ok && same.alice.transcript.outcome == wire::Outcome::confirmed &&
                         same.bob_outcome == wire::Outcome::confirmed && !same.alice.key.empty() &&
                         same.alice.key.to_bytes() == same.bob_key.to_bytes();
  int mismatches = 0, leaked = 0;
  for (int t = 0; t < 100; ++t) {
    const BitString a = random_bits(n, rng);
    BitString b = a;
    b.flip(rng() % n);
    const PairResult r = two_process_session(a, b);
    if (r.ok && r.alice.transcript.outcome == wire::Outcome::mismatch && r.bob_outcome == wire::Outcome::mismatch) {
      ++mismatches;
    }
    leaked += !r.alice.key.empty() || !r.bob_key.empty();
  }
  std::ostringstream d;
  d << "identical keys: " << (confirmed ? "confirmed, " + std::to_string(same.alice.key.size()) + "-bit keys equal"
                                        : std::string("NOT confirmed"))
    << "; one flipped bit: mismatch in " << mismatches << "/100, key material emitted in " << leaked;
  return {confirmed && mismatches >= 99 && leaked == 0, d.str()};
}

// 9. Linearity of the direct product.
Outcome linearity() {
  std::mt19937_64 rng(0xA9);
  int bad = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 1 << 12)(rng);
    const std::size_t l = std::uniform_int_distribution<std::size_t>(1, n)(rng);
    const ToeplitzSeed s = random_seed(n, l, rng);
    const BitString a = random_bits(n, rng), b = random_bits(n, rng);
    bad += hash_direct(a ^ b, s) != (hash_direct(a, s) ^ hash_direct(b, s));
  }
  return {bad == 0, "500 trials, " + std::to_string(bad) + " violations"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "oracle equivalence", oracle_equivalence},
      {2, "plan invariance", plan_invariance},
      {3, "exhaustive small instances", exhaustive_small},
      {4, "precision contract", precision_contract},
      {5, "finite-size math", finite_size_math},
      {6, "benchmark table structure", table_structure},
      {7, "length compatibility at scale", scale},
      {8, "session round trip", session_round_trip},
      {9, "linearity", linearity},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      wanted.push_back(std::stoi(argv[++i]));
    } else {
      std::cerr << "usage: lcpa_acceptance [--criterion N]...\n";
      return 2;
    }
  }

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::ostringstream secs;
    secs.precision(3);
    secs << since(t0);
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
              << secs.str() << " s]" << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
