#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lcpa/bench.hpp"
#include "lcpa/verify.hpp"

using namespace lcpa;

TEST(Verify, DefaultsPass) {
  const VerifyReport r = run_verify(VerifyOptions{});
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.trials_run, 50u);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Verify, CorruptedMergeIsLocated) {
  VerifyOptions o;
  o.n = 1 << 12;
  o.l = 100;
  o.trials = 5;
  o.corrupt = std::make_pair(0, 0);
  const VerifyReport r = run_verify(o);
  ASSERT_FALSE(r.pass);
  ASSERT_TRUE(r.mismatch->batch.has_value());
  EXPECT_EQ(*r.mismatch->batch, std::make_pair(std::size_t{0}, std::size_t{0}));
  EXPECT_EQ(r.trials_run, 1u);
}

TEST(Verify, ZeroTrialsWarns) {
  VerifyOptions o;
  o.trials = 0;
  const VerifyReport r = run_verify(o);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.trials_run, 0u);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Verify, RejectsOversizedRuns) {
  VerifyOptions o;
  o.n = verify_max_n + 1;
  EXPECT_THROW(run_verify(o), ParameterError);
  o.n = 10;
  o.l = 11;
  EXPECT_THROW(run_verify(o), ParameterError);
}

TEST(Bench, MedianOfRepeats) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0}), 2.5);
  BenchOptions o;
  o.sizes = {mbit / 4};
  o.batch_bits = {mbit / 16};
  o.repeats = 3;
  const auto rows = run_bench(o);
  ASSERT_EQ(rows.size(), 1u);
  ASSERT_EQ(rows[0].seconds.size(), 3u);
  EXPECT_EQ(rows[0].median_seconds, median(rows[0].seconds));
}

TEST(Bench, KeysAgreeAcrossBatchSizes) {
  BenchOptions o;
  o.sizes = {mbit / 2, mbit};
  o.batch_bits = {mbit / 16, mbit / 8, mbit / 4};
  const auto rows = run_bench(o);
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_TRUE(rows[i].feasible) << rows[i].note;
    EXPECT_EQ(rows[i].key_fingerprint, rows[i - i % 3].key_fingerprint);
  }
  EXPECT_NE(rows[0].key_fingerprint, rows[3].key_fingerprint);
  EXPECT_EQ(rows[3].batches, 16u);

  std::ostringstream table, csv;
  write_table(table, rows);
  write_csv(csv, rows);
  EXPECT_NE(table.str().find("Batch size 0.0625 Mbits"), std::string::npos);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
}

TEST(Bench, EmptySizesGiveEmptyTable) {
  BenchOptions o;
  o.batch_bits = {mbit};
  EXPECT_TRUE(run_bench(o).empty());
}

TEST(Bench, InfeasibleRowIsReported) {
  BenchOptions o;
  o.sizes = {mbit};
  o.batch_bits = {mbit};
  o.memory_budget = 1024;
  const auto rows = run_bench(o);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].feasible);
  EXPECT_FALSE(rows[0].note.empty());
}
