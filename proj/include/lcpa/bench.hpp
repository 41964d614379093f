#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lcpa/bitstring.hpp"
#include "lcpa/pipeline.hpp"
#include "lcpa/toeplitz.hpp"

namespace lcpa {

inline constexpr std::size_t mbit = std::size_t{1} << 20;

struct BenchOptions {
  std::vector<std::size_t> sizes;        // input lengths, bits
  std::vector<std::size_t> batch_bits;   // batch caps, bits
  std::optional<Precision> precision;    // nullopt: cheapest feasible backend
  std::size_t repeats = 1;
  double key_ratio = 0.1;                // l = floor(n * key_ratio)
  std::size_t memory_budget = std::size_t{2} << 30;
  std::uint64_t rng_seed = 7;
};

struct BenchRow {
  std::size_t input_bits = 0;
  std::size_t batch_bits = 0;
  std::size_t output_bits = 0;
  bool feasible = false;
  std::string note;  // reason when infeasible
  std::size_t batches = 0;
  std::size_t p = 0;
  std::size_t q = 0;
  Precision mode = Precision::fp32;
  std::vector<double> seconds;  // one per repeat
  double median_seconds = 0;
  std::uint64_t key_fingerprint = 0;

  double gbps() const { return median_seconds > 0 ? static_cast<double>(input_bits) / median_seconds / 1e9 : 0.0; }
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// For each input length one random (u, seed) pair is drawn and hashed under
// every batch size, so keys are comparable across a row.
inline std::vector<BenchRow> run_bench(const BenchOptions& opt,
                                       const std::function<void(const BenchRow&)>& on_row = {}) {
  std::vector<BenchRow> rows;
  if (opt.repeats < 1) throw ParameterError("repeats", "must be >= 1");
  for (std::size_t size_index = 0; size_index < opt.sizes.size(); ++size_index) {
    const std::size_t n = opt.sizes[size_index];
    const auto l = static_cast<std::size_t>(static_cast<double>(n) * opt.key_ratio);
    std::mt19937_64 rng(opt.rng_seed + size_index);
    std::optional<BitString> u;
    std::optional<ToeplitzSeed> seed;
    if (n >= 1 && l >= 1) {
      u = random_bits(n, rng);
      seed = ToeplitzSeed(random_bits(n + l - 1, rng), n, l);
    }

    for (const std::size_t batch : opt.batch_bits) {
      BenchRow row;
      row.input_bits = n;
      row.batch_bits = batch;
      row.output_bits = l;
      try {
        if (!u) throw ParameterError("n", "input too short for a non-empty key at this ratio");
        PipelineOptions po;
        po.precision = opt.precision;
        po.max_batch_bits = batch;
        po.memory_budget = opt.memory_budget;
        for (std::size_t r = 0; r < opt.repeats; ++r) {
          const PipelineResult res = run_pipeline(*u, *seed, po);
          row.seconds.push_back(res.seconds);
          row.batches = res.plan.batch_count();
          row.p = res.plan.p;
          row.q = res.plan.q;
          row.mode = res.plan.policy.mode;
          row.key_fingerprint = fingerprint(res.key);
        }
        row.median_seconds = median(row.seconds);
        row.feasible = true;
      } catch (const Error& e) {
        row.feasible = false;
        row.note = e.what();
      }
      if (on_row) on_row(row);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// One line per input length, one (batches, time, speed) group per batch
// size.
inline void write_table(std::ostream& out, const std::vector<BenchRow>& rows) {
  std::vector<std::size_t> batches;
  std::vector<std::size_t> inputs;
  std::map<std::pair<std::size_t, std::size_t>, const BenchRow*> cell;
  for (const auto& r : rows) {
    if (std::find(batches.begin(), batches.end(), r.batch_bits) == batches.end()) batches.push_back(r.batch_bits);
    if (std::find(inputs.begin(), inputs.end(), r.input_bits) == inputs.end()) inputs.push_back(r.input_bits);
    cell[{r.input_bits, r.batch_bits}] = &r;
  }
  auto mb = [](std::size_t bits) {
    std::ostringstream s;
    s << static_cast<double>(bits) / static_cast<double>(mbit);
    return s.str();
  };

  out << std::left << std::setw(12) << "Input(Mb)";
  for (auto b : batches) out << "| " << std::setw(36) << ("Batch size " + mb(b) + " Mbits");
  out << "\n" << std::setw(12) << "";
  for (std::size_t i = 0; i < batches.size(); ++i) {
    out << "| " << std::setw(8) << "batches" << std::setw(10) << "time(ms)" << std::setw(10) << "Gbps"
        << std::setw(8) << "prec";
  }
  out << "\n";
  for (auto in : inputs) {
    out << std::setw(12) << mb(in);
    for (auto b : batches) {
      const BenchRow* r = cell[{in, b}];
      out << "| ";
      if (r == nullptr || !r->feasible) {
        out << std::setw(36) << "infeasible";
        continue;
      }
      std::ostringstream ms, gb;
      ms << std::fixed << std::setprecision(1) << r->median_seconds * 1e3;
      gb << std::fixed << std::setprecision(3) << r->gbps();
      out << std::setw(8) << r->batches << std::setw(10) << ms.str() << std::setw(10) << gb.str() << std::setw(8)
          << to_string(r->mode);
    }
    out << "\n";
  }
}

inline void write_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "input_bits,batch_bits,output_bits,feasible,precision,p,q,batches,median_ms,gbps,key_fingerprint,note\n";
  for (const auto& r : rows) {
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    std::replace(note.begin(), note.end(), '"', '\'');
    out << r.input_bits << ',' << r.batch_bits << ',' << r.output_bits << ',' << (r.feasible ? 1 : 0) << ','
        << to_string(r.mode) << ',' << r.p << ',' << r.q << ',' << r.batches << ',' << std::fixed
        << std::setprecision(3) << r.median_seconds * 1e3 << ',' << std::setprecision(6) << r.gbps() << ','
        << std::hex << r.key_fingerprint << std::dec << ",\"" << note << "\"\n";
  }
}

}  // namespace lcpa
