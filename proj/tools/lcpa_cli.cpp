// lcpa: command-line front end for length-compatible Toeplitz privacy
// amplification.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lcpa/lcpa.hpp"

namespace {

using namespace lcpa;

constexpr int exit_mismatch = 20;
constexpr int exit_aborted = 21;
constexpr int exit_verify_failed = 1;

// "4096", "64K", "2G" (binary multiples).
std::size_t parse_size(const std::string& text, const std::string& field) {
  if (text.empty()) throw ParameterError(field, "empty size");
  std::size_t pos = 0;
  double value = 0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ParameterError(field, "not a number: '" + text + "'");
  }
  double scale = 1;
  if (pos < text.size()) {
    switch (text[pos]) {
      case 'k': case 'K': scale = 1024.0; break;
      case 'm': case 'M': scale = 1024.0 * 1024; break;
      case 'g': case 'G': scale = 1024.0 * 1024 * 1024; break;
      default: throw ParameterError(field, "unknown suffix in '" + text + "'");
    }
  }
  if (value < 0) throw ParameterError(field, "must be non-negative");
  return static_cast<std::size_t>(std::llround(value * scale));
}

// Comma-separated Mbit values; an empty string is an empty list.
std::vector<std::size_t> parse_mbit_list(const std::string& text, const std::string& field) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(static_cast<std::size_t>(std::llround(std::stod(item) * static_cast<double>(mbit))));
    } catch (const std::exception&) {
      throw ParameterError(field, "not a number: '" + item + "'");
    }
  }
  return out;
}

std::optional<Precision> parse_precision_flag(const std::string& text) {
  if (text == "auto") return std::nullopt;
  return parse_precision(text);
}

void print_plan(const PartitionPlan& plan) {
  std::size_t lo = plan.n, hi = 0;
  for (const auto& blk : plan.batches) {
    for (const auto& b : blk) {
      lo = std::min(lo, b.length);
      hi = std::max(hi, b.length);
    }
  }
  std::cout << "plan: p=" << plan.p << " q=" << plan.q << " batches=" << plan.batch_count()
            << " batch_bits=[" << lo << ", " << hi << "] transform=" << plan.max_transform_size()
            << " precision=" << to_string(plan.policy.mode) << " est_peak_bytes=" << plan.peak_bytes() << "\n";
}

struct AmplifyArgs {
  std::string in, seed, seed_out, out, precision = "auto", budget = "2G", batch_bits;
  std::size_t l = 0;
};

int cmd_amplify(const AmplifyArgs& a) {
  if (a.l == 0) throw ParameterError("l", "output length must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const BitString u = keyfile::read(a.in);
  if (a.l > u.size()) throw ParameterError("l", "exceeds input length " + std::to_string(u.size()));

  ToeplitzSeed seed;
  if (a.seed.empty() || a.seed == "generate") {
    seed = generate_seed(u.size(), a.l);
    if (!a.seed_out.empty()) keyfile::write(a.seed_out, seed.bits());
  } else {
    BitString bits = keyfile::read(a.seed);
    if (bits.size() != u.size() + a.l - 1) {
      throw ShapeError("seed file holds " + std::to_string(bits.size()) + " bits, n + l - 1 = " +
                       std::to_string(u.size() + a.l - 1));
    }
    seed = ToeplitzSeed(std::move(bits), u.size(), a.l);
  }

  PipelineOptions po;
  po.precision = parse_precision_flag(a.precision);
  po.memory_budget = parse_size(a.budget, "budget");
  if (!a.batch_bits.empty()) po.max_batch_bits = parse_size(a.batch_bits, "batch-bits");
  const PipelineResult r = run_pipeline(u, seed, po);
  keyfile::write(a.out, r.key);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const auto& e : r.escalations) std::cout << "escalated: " << e << "\n";
  print_plan(r.plan);
  std::cout << "input_bits=" << u.size() << " output_bits=" << r.key.size() << "\n";
  std::cout << std::fixed << std::setprecision(3) << "hash_time_ms=" << r.seconds * 1e3
            << " hash_throughput_bps=" << std::setprecision(0) << static_cast<double>(u.size()) / r.seconds << "\n";
  std::cout << std::setprecision(3) << "total_time_ms=" << total * 1e3 << " total_throughput_bps="
            << std::setprecision(0) << static_cast<double>(u.size()) / total << "\n";
  return 0;
}

struct ParamsArgs {
  std::uint64_t dim_hx = 2, n = 100000000;
  double eps_bar = 1e-10, eps_pa = 1e-10, beta = 0.95, i_xy = 0.5, s_ye = 0.3;
};

int cmd_params(const ParamsArgs& a) {
  FiniteSizeParams fs{a.dim_hx, a.eps_bar, a.eps_pa, a.n};
  const RateInputs rate{a.beta, a.i_xy, a.s_ye};
  const KeyRateResult r = evaluate_key_rate(fs, rate);
  std::cout << std::setprecision(10);
  std::cout << "n=" << a.n << "\n";
  std::cout << "delta_n=" << static_cast<double>(r.delta_n) << "\n";
  std::cout << "k=" << static_cast<double>(r.k) << "\n";
  std::cout << "l=" << r.l << "\n";
  if (r.l >= 1) {
    const auto cp = collision_probability(a.n, r.l);
    std::cout << "collision_log2=" << static_cast<double>(cp.log2) << "\n";
  } else {
    std::cout << "collision_log2=n/a\n";
    std::cout << "no secure key at this n\n";
    if (const auto need = smallest_positive_n(fs, rate)) {
      std::cout << "smallest n with k > 0: " << *need << "\n";
    } else {
      std::cout << "no block length makes k positive for these rate inputs\n";
    }
  }
  return 0;
}

int cmd_seed_gen(std::size_t n, std::size_t l, const std::string& out) {
  const ToeplitzSeed seed = generate_seed(n, l);
  keyfile::write(out, seed.bits());
  std::cout << "wrote " << seed.bits().size() << "-bit seed for n=" << n << " l=" << l << " to " << out << "\n";
  return 0;
}

int cmd_verify(const VerifyOptions& opt) {
  const VerifyReport r = run_verify(opt);
  for (const auto& w : r.warnings) std::cout << "warning: " << w << "\n";
  if (r.pass) {
    std::cout << "PASS " << r.trials_run << " trials, n=" << opt.n << " l=" << opt.l << "\n";
    return 0;
  }
  const auto& m = *r.mismatch;
  std::cout << "FAIL trial " << m.trial << " plan p=" << m.p << " q=" << m.q << " precision=" << to_string(m.mode);
  if (m.batch) std::cout << " block=" << m.batch->first << " batch=" << m.batch->second;
  std::cout << "\n";
  return exit_verify_failed;
}

struct BenchArgs {
  std::string sizes = "4,8,16,32,64,128", batches = "1,2,4", precision = "auto", csv, budget = "2G";
  std::size_t repeats = 1;
  double ratio = 0.1;
};

int cmd_bench(const BenchArgs& a) {
  BenchOptions opt;
  opt.sizes = parse_mbit_list(a.sizes, "sizes");
  opt.batch_bits = parse_mbit_list(a.batches, "batch");
  opt.precision = parse_precision_flag(a.precision);
  opt.repeats = a.repeats;
  opt.key_ratio = a.ratio;
  opt.memory_budget = parse_size(a.budget, "budget");
  const auto rows = run_bench(opt, [](const BenchRow& r) {
    std::cerr << "  n=" << r.input_bits << " batch=" << r.batch_bits
              << (r.feasible ? " ok" : " infeasible: " + r.note) << "\n";
  });
  write_table(std::cout, rows);
  if (!a.csv.empty()) {
    std::ofstream out(a.csv);
    if (!out) throw Error(ErrorKind::parse, "cannot open " + a.csv);
    write_csv(out, rows);
  }
  return 0;
}

struct SessionArgs {
  std::string role, listen, connect, key, out, precision = "auto", budget = "2G", batch_bits;
  ParamsArgs params;
  std::uint32_t tag_bits = 64;
};

int cmd_session(const SessionArgs& a) {
  if (a.listen.empty() == a.connect.empty()) throw ParameterError("transport", "give exactly one of --listen, --connect");
  SessionConfig cfg;
  if (a.role == "alice") {
    cfg.role = Role::alice;
  } else if (a.role == "bob") {
    cfg.role = Role::bob;
  } else {
    throw ParameterError("role", "expected alice or bob");
  }
  const BitString weak = keyfile::read(a.key);
  cfg.n = weak.size();
  cfg.finite_size = FiniteSizeParams{a.params.dim_hx, a.params.eps_bar, a.params.eps_pa, weak.size()};
  cfg.rate = RateInputs{a.params.beta, a.params.i_xy, a.params.s_ye};
  cfg.confirm_tag_bits = a.tag_bits;
  cfg.pipeline.precision = parse_precision_flag(a.precision);
  cfg.pipeline.memory_budget = parse_size(a.budget, "budget");
  if (!a.batch_bits.empty()) cfg.pipeline.max_batch_bits = parse_size(a.batch_bits, "batch-bits");

  std::optional<Channel> channel;
  if (!a.listen.empty()) {
    cfg.transport = a.listen;
    Listener listener(Endpoint::parse(a.listen));
    std::cerr << "listening on port " << listener.port() << "\n";
    channel.emplace(listener.accept());
  } else {
    cfg.transport = a.connect;
    channel.emplace(connect_to(Endpoint::parse(a.connect)));
  }

  auto print_transcript = [](const SessionTranscript& t) {
    for (const auto& m : t.messages) {
      std::cout << (m.sent ? "sent " : "recv ") << wire::to_string(m.type) << " bytes=" << m.length
                << " digest=" << std::hex << m.digest << std::dec << "\n";
    }
    std::cout << "seed_digest=" << std::hex << t.applied_seed_digest << std::dec << "\n";
  };

  try {
    const SessionResult r = run_session(cfg, weak, *channel);
    print_transcript(r.transcript);
    std::cout << "k=" << static_cast<double>(r.rate.k) << " l=" << r.rate.l << "\n";
    std::cout << "outcome=" << wire::to_string(r.transcript.outcome) << "\n";
    switch (r.transcript.outcome) {
      case wire::Outcome::confirmed:
        if (!a.out.empty()) keyfile::write(a.out, r.key);
        return 0;
      case wire::Outcome::mismatch: return exit_mismatch;
      case wire::Outcome::aborted_no_key: return exit_aborted;
    }
  } catch (const SessionError& e) {
    print_transcript(e.transcript());
    throw;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Length-compatible Toeplitz privacy amplification"};
  app.require_subcommand(1);

  AmplifyArgs amp;
  auto* amplify_cmd = app.add_subcommand("amplify", "Hash a weak-key file down to an l-bit secret key");
  amplify_cmd->add_option("--in", amp.in, "Weak key file")->required();
  amplify_cmd->add_option("--seed", amp.seed, "Seed file, or 'generate'");
  amplify_cmd->add_option("--seed-out", amp.seed_out, "Where to store a generated seed");
  amplify_cmd->add_option("--out", amp.out, "Secret key output file")->required();
  amplify_cmd->add_option("-l,--length", amp.l, "Output length in bits")->required();
  amplify_cmd->add_option("--budget", amp.budget, "Memory budget in bytes (K/M/G suffixes)");
  amplify_cmd->add_option("--precision", amp.precision, "single, double, exact or auto");
  amplify_cmd->add_option("--batch-bits", amp.batch_bits, "Batch size cap in bits (K/M/G suffixes)");

  ParamsArgs prm;
  auto add_param_flags = [](CLI::App* cmd, ParamsArgs& p, bool with_n) {
    cmd->add_option("--dim-hx", p.dim_hx, "Dimension of the raw key's Hilbert space")->capture_default_str();
    cmd->add_option("--eps-bar", p.eps_bar, "Smoothing parameter")->capture_default_str();
    cmd->add_option("--eps-pa", p.eps_pa, "Privacy amplification failure probability")->capture_default_str();
    if (with_n) cmd->add_option("--n", p.n, "Block length in bits")->capture_default_str();
    cmd->add_option("--beta", p.beta, "Reconciliation efficiency")->capture_default_str();
    cmd->add_option("--i-xy", p.i_xy, "Mutual information I(x:y), bits/symbol")->capture_default_str();
    cmd->add_option("--s-ye", p.s_ye, "Holevo bound S(y:E), bits/symbol")->capture_default_str();
  };
  auto* params_cmd = app.add_subcommand("params", "Finite-size penalty, key rate and output length");
  add_param_flags(params_cmd, prm, true);

  std::size_t sg_n = 0, sg_l = 0;
  std::string sg_out;
  auto* seed_cmd = app.add_subcommand("seed-gen", "Draw a Toeplitz seed of n + l - 1 bits");
  seed_cmd->add_option("--n", sg_n, "Input length")->required();
  seed_cmd->add_option("-l,--length", sg_l, "Output length")->required();
  seed_cmd->add_option("--out", sg_out, "Seed file")->required();

  VerifyOptions ver;
  std::vector<std::size_t> corrupt;
  auto* verify_cmd = app.add_subcommand("verify", "Compare the partitioned path with the direct product");
  verify_cmd->add_option("--n", ver.n)->capture_default_str();
  verify_cmd->add_option("-l,--length", ver.l)->capture_default_str();
  verify_cmd->add_option("--trials", ver.trials)->capture_default_str();
  verify_cmd->add_option("--rng-seed", ver.rng_seed)->capture_default_str();
  verify_cmd->add_option("--corrupt", corrupt, "Fault injection: flip a bit of batch BLOCK,BATCH")
      ->expected(2)
      ->delimiter(',')
      ->group("");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Throughput table over input lengths and batch sizes");
  bench_cmd->add_option("--sizes", bench.sizes, "Input lengths in Mbit, comma separated")->capture_default_str();
  bench_cmd->add_option("--batch", bench.batches, "Batch sizes in Mbit, comma separated")->capture_default_str();
  bench_cmd->add_option("--precision", bench.precision)->capture_default_str();
  bench_cmd->add_option("--repeats", bench.repeats)->capture_default_str();
  bench_cmd->add_option("--ratio", bench.ratio, "Output length as a fraction of input")->capture_default_str();
  bench_cmd->add_option("--budget", bench.budget)->capture_default_str();
  bench_cmd->add_option("--csv", bench.csv, "Write rows as CSV");

  SessionArgs ses;
  auto* session_cmd = app.add_subcommand("session", "Run one side of the two-party protocol");
  session_cmd->add_option("--role", ses.role, "alice or bob")->required();
  session_cmd->add_option("--listen", ses.listen, "host:port to accept on");
  session_cmd->add_option("--connect", ses.connect, "host:port to dial");
  session_cmd->add_option("--key", ses.key, "Weak key file")->required();
  session_cmd->add_option("--out", ses.out, "Secret key output file");
  session_cmd->add_option("--tag-bits", ses.tag_bits)->capture_default_str();
  session_cmd->add_option("--precision", ses.precision)->capture_default_str();
  session_cmd->add_option("--budget", ses.budget)->capture_default_str();
  session_cmd->add_option("--batch-bits", ses.batch_bits);
  add_param_flags(session_cmd, ses.params, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*amplify_cmd) return cmd_amplify(amp);
    if (*params_cmd) return cmd_params(prm);
    if (*seed_cmd) return cmd_seed_gen(sg_n, sg_l, sg_out);
    if (*verify_cmd) {
      if (!corrupt.empty()) ver.corrupt = std::make_pair(corrupt.at(0), corrupt.at(1));
      return cmd_verify(ver);
    }
    if (*bench_cmd) return cmd_bench(bench);
    if (*session_cmd) return cmd_session(ses);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
