/* Copyright 2026 The speclab Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <cmath>

#include <json.hpp>

#include "speclab/enumerate.hpp"
#include "speclab/exact.hpp"
#include "speclab/montecarlo.hpp"

namespace speclab {
namespace {

MarkovPair random_pair(std::uint64_t seed, std::size_t vocab, std::size_t horizon) {
  return MarkovPair(random_markov_model(seed, vocab, horizon),
                    random_markov_model(seed + 1, vocab, horizon));
}

TEST(Campaign, IdenticalModelsReportZeros) {
  const MarkovModel chain = random_markov_model(5, 4, 10);
  Campaign c{MarkovPair(chain, chain), SpeculativeAlgorithm{}, 1000};
  const CampaignReport r = run_campaign(c);
  ASSERT_EQ(r.checkpoints.size(), 10u);
  for (const Checkpoint& cp : r.checkpoints) {
    EXPECT_EQ(cp.mean, 0.0);
    EXPECT_EQ(cp.std_error, 0.0);
    EXPECT_EQ(cp.exact, 0.0);
    EXPECT_EQ(cp.rel_dev, 0.0);
  }
}

TEST(Campaign, CheckpointCadence) {
  Campaign c{random_pair(1, 3, 5), SpeculativeAlgorithm{}, 250};
  const CampaignReport r = run_campaign(c);
  ASSERT_EQ(r.checkpoints.size(), 3u);
  EXPECT_EQ(r.checkpoints[0].runs, 100u);
  EXPECT_EQ(r.checkpoints[1].runs, 200u);
  EXPECT_EQ(r.checkpoints[2].runs, 250u);
}

TEST(Campaign, StatisticsMatchDirectComputation) {
  const MarkovPair pair = random_pair(2, 3, 6);
  Campaign c{pair, BatchAlgorithm{2}, 300, 300, 77};
  const CampaignReport r = run_campaign(c);
  const Rng master(77);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < 300; ++i) {
    Rng rng = master.split(i);
    const double x = static_cast<double>(batch_decode(pair, 2, rng).stats.rejections);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / 300;
  const double sd = std::sqrt((sum_sq - 300 * mean * mean) / 299);
  ASSERT_EQ(r.checkpoints.size(), 1u);
  EXPECT_NEAR(r.checkpoints[0].mean, mean, 1e-12);
  EXPECT_NEAR(r.checkpoints[0].std_error, sd / std::sqrt(300.0), 1e-12);
  const double exact = expected_rejections_batch(pair, 2).total;
  EXPECT_EQ(r.checkpoints[0].exact, exact);
  EXPECT_NEAR(r.checkpoints[0].rel_dev, (mean - exact) / exact, 1e-12);
}

TEST(Campaign, ThreadCountDoesNotChangeResults) {
  Campaign c{random_pair(3, 4, 12), BatchAlgorithm{3}, 2000, 100, 5};
  c.threads = 1;
  const std::string one = report_to_csv(run_campaign(c));
  c.threads = 4;
  const std::string four = report_to_csv(run_campaign(c));
  EXPECT_EQ(one, four);
  c.threads = 0;
  EXPECT_EQ(report_to_json(run_campaign(c)), [&] {
    c.threads = 3;
    return report_to_json(run_campaign(c));
  }());
}

TEST(Campaign, SeedChangesResults) {
  Campaign a{random_pair(3, 4, 12), SpeculativeAlgorithm{}, 500, 100, 1};
  Campaign b = a;
  b.seed = 2;
  EXPECT_NE(report_to_csv(run_campaign(a)), report_to_csv(run_campaign(b)));
}

TEST(Campaign, LargePairAgreesWithFormulas) {
  const MarkovPair pair = random_pair(1, 7, 50);
  Campaign sd{pair, SpeculativeAlgorithm{}, 10'000, 100, 2024};
  const Checkpoint last = run_campaign(sd).checkpoints.back();
  EXPECT_LE(std::abs(last.mean - last.exact), 3 * last.std_error)
      << last.mean << " vs " << last.exact;
  for (std::size_t m : {4, 5}) {
    Campaign batch{pair, BatchAlgorithm{m}, 10'000, 100, 2024};
    const Checkpoint b = run_campaign(batch).checkpoints.back();
    EXPECT_LE(std::abs(b.mean - b.exact), 3 * b.std_error) << "M=" << m;
    EXPECT_LT(b.exact, last.exact);
  }
}

TEST(Campaign, StandardErrorDecaysLikeInverseRoot) {
  Campaign c{random_pair(8, 5, 20), SpeculativeAlgorithm{}, 10'000, 100, 3};
  const CampaignReport r = run_campaign(c);
  const double ratio = r.checkpoints.front().std_error / r.checkpoints.back().std_error;
  EXPECT_GT(ratio, 10.0 / 2);
  EXPECT_LT(ratio, 10.0 * 2);
}

TEST(Campaign, AutoregressiveCostsHorizon) {
  Campaign c{random_pair(8, 3, 7), AutoregressiveAlgorithm{}, 200};
  const CampaignReport r = run_campaign(c);
  EXPECT_EQ(r.exact, 7.0);
  EXPECT_EQ(r.checkpoints.back().mean, 7.0);
  EXPECT_EQ(r.checkpoints.back().rel_dev, 0.0);
}

TEST(Campaign, GenericReferenceFromEnumerationOrMissing) {
  const MarkovPair small = random_pair(4, 3, 3);
  const GenericAlgorithm policy{random_unbiased_policy(1), "random"};
  EXPECT_NEAR(exact_reference(small, policy),
              enumerate_expected_rejections(small, policy), 1e-15);
  EXPECT_TRUE(std::isnan(exact_reference(random_pair(4, 7, 50), policy)));
  Campaign c{random_pair(4, 7, 50), policy, 100};
  const CampaignReport r = run_campaign(c);
  EXPECT_TRUE(std::isnan(r.checkpoints.back().rel_dev));
  const auto j = nlohmann::json::parse(report_to_json(r));
  EXPECT_TRUE(j["exact"].is_null());
  EXPECT_EQ(j["algorithm"], "random");
}

TEST(Campaign, FrequencyTable) {
  const MarkovPair pair = random_pair(6, 2, 3);
  Campaign c{pair, SpeculativeAlgorithm{}, 20'000};
  c.record_frequencies = true;
  const CampaignReport r = run_campaign(c);
  ASSERT_EQ(r.frequencies.size(), 8u);
  EXPECT_LE(l1_distance(r.frequencies, joint_distribution(pair.target)), 0.05);
  c.pair = random_pair(6, 7, 50);
  EXPECT_THROW(run_campaign(c), SizeCapExceeded);
}

TEST(Campaign, InvalidSettings) {
  Campaign c{random_pair(6, 2, 3), SpeculativeAlgorithm{}, 0};
  EXPECT_THROW(run_campaign(c), InvalidArgument);
  c.runs = 10;
  c.checkpoint_every = 0;
  EXPECT_THROW(run_campaign(c), InvalidArgument);
}

TEST(Report, CsvLayout) {
  CampaignReport r;
  r.checkpoints.push_back({100, 1.5, 0.25, 1.4, (1.5 - 1.4) / 1.4});
  r.checkpoints.push_back({200, 0.0, 0.0, std::nan(""), std::nan("")});
  EXPECT_EQ(report_to_csv(r),
            "checkpoint,mean,stderr,exact,rel_dev\n"
            "100,1.5,0.25,1.4,0.0714285714286\n"
            "200,0,0,nan,nan\n");
}

TEST(Report, FormatReal) {
  EXPECT_EQ(format_real(0.1 + 0.2), "0.3");
  EXPECT_EQ(format_real(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_real(50.0), "50");
  EXPECT_EQ(format_real(INFINITY), "inf");
  EXPECT_EQ(format_real(-INFINITY), "-inf");
  EXPECT_EQ(format_real(NAN), "nan");
}

TEST(Unbiasedness, AutoregressivePasses) {
  const UnbiasednessResult r =
      unbiasedness_check(random_pair(12, 2, 4), AutoregressiveAlgorithm{}, 1'000'000, 1);
  EXPECT_TRUE(r.pass) << r.l1;
}

TEST(Unbiasedness, SpeculativePassesAndBiasedControlFails) {
  const MarkovPair pair = random_pair(13, 2, 3);
  EXPECT_TRUE(unbiasedness_check(pair, SpeculativeAlgorithm{}, 1'000'000, 2).pass);
  const Policy accept_all{[](const StepContext&, Token) { return 1.0; },
                          [](const StepContext& ctx) { return ctx.target; }};
  const UnbiasednessResult biased =
      unbiasedness_check(pair, GenericAlgorithm{accept_all}, 200'000, 3);
  EXPECT_FALSE(biased.pass);
  const double gap = l1_distance(joint_distribution(pair.draft), joint_distribution(pair.target));
  EXPECT_NEAR(biased.l1, gap, 0.02);
}

TEST(Unbiasedness, TableCap) {
  EXPECT_THROW(unbiasedness_check(random_pair(1, 7, 5), SpeculativeAlgorithm{}, 10, 1),
               SizeCapExceeded);
}

TEST(BatchScan, RowsAndLimit) {
  const MarkovPair pair = random_pair(21, 4, 10);
  const auto rows = batch_scan(pair, {1, 2, 3, 4}, 2000, 9);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].exact, expected_rejections_sd(pair));
  EXPECT_FALSE(rows.back().batch.has_value());
  EXPECT_TRUE(std::isnan(rows.back().mean));
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    EXPECT_GE(rows[i].exact, rows.back().exact);
    if (i > 0) {
      EXPECT_LE(rows[i].exact, rows[i - 1].exact);
    }
    EXPECT_LE(std::abs(rows[i].mean - rows[i].exact), 4 * rows[i].std_error);
  }
}

TEST(BatchScan, IdenticalModelsAllZero) {
  const MarkovModel chain = random_markov_model(5, 3, 6);
  for (const BatchScanRow& row : batch_scan(MarkovPair(chain, chain), {1, 2, 8}, 100, 1)) {
    EXPECT_EQ(row.exact, 0.0);
    if (row.batch) EXPECT_EQ(row.mean, 0.0);
  }
}

TEST(BatchScan, WithoutRunsAndErrors) {
  const MarkovPair pair = random_pair(21, 3, 4);
  const auto rows = batch_scan(pair, {2}, 0, 1);
  EXPECT_TRUE(std::isnan(rows[0].mean));
  EXPECT_THROW(batch_scan(pair, {}, 0, 1), InvalidArgument);
  EXPECT_THROW(batch_scan(pair, {0}, 0, 1), InvalidArgument);
}

}  // namespace
}  // namespace speclab
