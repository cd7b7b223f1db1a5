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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "speclab/decoding.hpp"
#include "speclab/model.hpp"

namespace speclab {

// Largest V^T for which empirical frequency tables are kept.
inline constexpr std::size_t kMaxFrequencySequences = 10'000;

using AnyPair = std::variant<MarkovPair, FullPair>;

PairView view(const AnyPair& pair);

struct Campaign {
  AnyPair pair;
  Algorithm algorithm;
  std::size_t runs = 0;
  std::size_t checkpoint_every = 100;
  std::uint64_t seed = 0;
  bool record_frequencies = false;
  unsigned threads = 0;  // 0 picks hardware concurrency
};

struct Checkpoint {
  std::size_t runs = 0;
  double mean = 0.0;
  double std_error = 0.0;  // sample stdev / sqrt(runs)
  double exact = 0.0;      // NaN when no reference is available
  double rel_dev = 0.0;    // (mean - exact) / exact
};

/// The metric is oracle calls per run, which equals rejections for the
/// rejection-based samplers and T for autoregressive decoding.
struct CampaignReport {
  std::string algorithm;
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  double exact = 0.0;
  std::vector<Checkpoint> checkpoints;
  std::vector<double> frequencies;  // empirical law of x_{1:T}, if recorded
};

/// Exact E[oracle calls] for the algorithm, or NaN if none is computable.
double exact_reference(const AnyPair& pair, const Algorithm& algorithm);

/// Runs are independent with Rng(seed).split(run index) each, so results do
/// not depend on the thread count.
CampaignReport run_campaign(const Campaign& campaign);

std::string report_to_csv(const CampaignReport& report);
std::string report_to_json(const CampaignReport& report);

struct UnbiasednessResult {
  double l1 = 0.0;
  bool pass = false;
  std::vector<double> empirical;
  std::vector<double> exact;  // joint law of the target
};

/// Empirical joint frequencies against the target's joint law. Throws
/// SizeCapExceeded when V^T exceeds kMaxFrequencySequences.
UnbiasednessResult unbiasedness_check(const AnyPair& pair,
                                      const Algorithm& algorithm,
                                      std::size_t samples, std::uint64_t seed,
                                      double threshold = 0.02);

struct BatchScanRow {
  std::optional<std::size_t> batch;  // empty for the M -> infinity row
  double exact = 0.0;
  double mean = 0.0;       // NaN on the limit row
  double std_error = 0.0;  // NaN on the limit row
};

/// One row per batch size plus a final limit row. A zero run count skips
/// simulation and leaves mean and std_error NaN.
std::vector<BatchScanRow> batch_scan(const AnyPair& pair,
                                     const std::vector<std::size_t>& batches,
                                     std::size_t runs, std::uint64_t seed);

/// "%.12g" formatting, with "inf", "-inf" and "nan" spelled out.
std::string format_real(double value);

}  // namespace speclab
