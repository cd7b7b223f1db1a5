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

#include "speclab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "speclab/enumerate.hpp"
#include "speclab/exact.hpp"

namespace speclab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RunRecord {
  std::vector<std::uint32_t> metric;
  std::vector<std::size_t> sequence;  // only filled when frequencies are kept
};

RunRecord simulate(PairView pair, const Algorithm& algorithm, std::size_t runs,
                   std::uint64_t seed, bool keep_sequences, unsigned threads) {
  RunRecord record;
  record.metric.resize(runs);
  if (keep_sequences) record.sequence.resize(runs);
  const Rng master(seed);
  const std::size_t vocab = pair.vocab_size();

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = master.split(i);
      const DecodeResult result = run_algorithm(pair, algorithm, rng);
      record.metric[i] = static_cast<std::uint32_t>(result.stats.oracle_calls);
      if (keep_sequences) {
        record.sequence[i] = sequence_index(result.trajectory.tokens, vocab);
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, runs));
  if (threads <= 1) {
    work(0, runs);
    return record;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (runs + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(runs, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(work, begin, end);
  }
  for (auto& th : pool) th.join();
  return record;
}

double relative_deviation(double mean, double exact) {
  if (std::isnan(exact)) return kNaN;
  if (exact == 0.0) {
    return mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return (mean - exact) / exact;
}

Checkpoint checkpoint(std::size_t k, long double sum, long double sum_sq,
                      double exact) {
  Checkpoint c;
  c.runs = k;
  const long double n = static_cast<long double>(k);
  c.mean = static_cast<double>(sum / n);
  if (k > 1) {
    const long double var = (n * sum_sq - sum * sum) / (n * (n - 1));
    c.std_error = static_cast<double>(std::sqrt(std::max(0.0L, var) / n));
  }
  c.exact = exact;
  c.rel_dev = relative_deviation(c.mean, exact);
  return c;
}

std::vector<double> frequencies(const std::vector<std::size_t>& sequence,
                                std::size_t count) {
  std::vector<std::size_t> hits(count, 0);
  for (std::size_t s : sequence) ++hits[s];
  std::vector<double> freq(count);
  const double n = static_cast<double>(sequence.size());
  for (std::size_t i = 0; i < count; ++i) {
    freq[i] = static_cast<double>(hits[i]) / n;
  }
  return freq;
}

nlohmann::json real_json(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

}  // namespace

PairView view(const AnyPair& pair) {
  return std::visit([](const auto& p) { return PairView(p); }, pair);
}

double exact_reference(const AnyPair& pair, const Algorithm& algorithm) {
  struct Visitor {
    const AnyPair& pair;
    double operator()(const SpeculativeAlgorithm&) const {
      return std::visit([](const auto& p) { return expected_rejections_sd(p); },
                        pair);
    }
    double operator()(const BatchAlgorithm& a) const {
      return std::visit(
          [&](const auto& p) { return expected_rejections_batch(p, a.batch).total; },
          pair);
    }
    double operator()(const GenericAlgorithm&) const {
      try {
        return enumerate_expected_rejections(view(pair), GenericAlgorithm(
            std::get<GenericAlgorithm>(algorithm)));
      } catch (const SizeCapExceeded&) {
        return kNaN;
      }
    }
    double operator()(const AutoregressiveAlgorithm&) const {
      return static_cast<double>(view(pair).horizon());
    }
    const Algorithm& algorithm;
  };
  return std::visit(Visitor{pair, algorithm}, algorithm);
}

CampaignReport run_campaign(const Campaign& campaign) {
  if (campaign.runs == 0) throw InvalidArgument("campaign needs at least one run");
  if (campaign.checkpoint_every == 0) {
    throw InvalidArgument("checkpoint interval must be at least 1");
  }
  const PairView pair = view(campaign.pair);
  std::size_t count = 0;
  if (campaign.record_frequencies) {
    count = checked_power(pair.vocab_size(), pair.horizon());
    if (count > kMaxFrequencySequences) {
      throw SizeCapExceeded("frequency table needs V^T <= " +
                            std::to_string(kMaxFrequencySequences));
    }
  }

  CampaignReport report;
  report.algorithm = algorithm_name(campaign.algorithm);
  report.runs = campaign.runs;
  report.seed = campaign.seed;
  report.exact = exact_reference(campaign.pair, campaign.algorithm);

  const RunRecord record =
      simulate(pair, campaign.algorithm, campaign.runs, campaign.seed,
               campaign.record_frequencies, campaign.threads);

  long double sum = 0.0L;
  long double sum_sq = 0.0L;
  for (std::size_t i = 0; i < campaign.runs; ++i) {
    const long double x = record.metric[i];
    sum += x;
    sum_sq += x * x;
    const std::size_t k = i + 1;
    if (k % campaign.checkpoint_every == 0 || k == campaign.runs) {
      report.checkpoints.push_back(checkpoint(k, sum, sum_sq, report.exact));
    }
  }
  if (campaign.record_frequencies) {
    report.frequencies = frequencies(record.sequence, count);
  }
  return report;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string report_to_csv(const CampaignReport& report) {
  std::ostringstream out;
  out << "checkpoint,mean,stderr,exact,rel_dev\n";
  for (const Checkpoint& c : report.checkpoints) {
    out << c.runs << ',' << format_real(c.mean) << ',' << format_real(c.std_error)
        << ',' << format_real(c.exact) << ',' << format_real(c.rel_dev) << '\n';
  }
  return out.str();
}

std::string report_to_json(const CampaignReport& report) {
  nlohmann::json j;
  j["algorithm"] = report.algorithm;
  j["runs"] = report.runs;
  j["seed"] = report.seed;
  j["exact"] = real_json(report.exact);
  nlohmann::json rows = nlohmann::json::array();
  for (const Checkpoint& c : report.checkpoints) {
    rows.push_back({{"checkpoint", c.runs},
                    {"mean", real_json(c.mean)},
                    {"stderr", real_json(c.std_error)},
                    {"exact", real_json(c.exact)},
                    {"rel_dev", real_json(c.rel_dev)}});
  }
  j["checkpoints"] = std::move(rows);
  if (!report.frequencies.empty()) j["frequencies"] = report.frequencies;
  return j.dump(2) + "\n";
}

UnbiasednessResult unbiasedness_check(const AnyPair& pair,
                                      const Algorithm& algorithm,
                                      std::size_t samples, std::uint64_t seed,
                                      double threshold) {
  if (samples == 0) throw InvalidArgument("need at least one sample");
  const PairView v = view(pair);
  const std::size_t count = checked_power(v.vocab_size(), v.horizon());
  if (count > kMaxFrequencySequences) {
    throw SizeCapExceeded("frequency table needs V^T <= " +
                          std::to_string(kMaxFrequencySequences));
  }
  const RunRecord record = simulate(v, algorithm, samples, seed, true, 0);
  UnbiasednessResult result;
  result.empirical = frequencies(record.sequence, count);
  result.exact = joint_distribution(v.target);
  result.l1 = l1_distance(result.empirical, result.exact);
  result.pass = result.l1 <= threshold;
  return result;
}

std::vector<BatchScanRow> batch_scan(const AnyPair& pair,
                                     const std::vector<std::size_t>& batches,
                                     std::size_t runs, std::uint64_t seed) {
  if (batches.empty()) throw InvalidArgument("batch range is empty");
  std::vector<BatchScanRow> rows;
  for (std::size_t m : batches) {
    if (m == 0) throw InvalidArgument("batch size must be at least 1");
    BatchScanRow row;
    row.batch = m;
    row.exact = exact_reference(pair, BatchAlgorithm{m});
    row.mean = kNaN;
    row.std_error = kNaN;
    if (runs > 0) {
      Campaign campaign{pair, BatchAlgorithm{m}, runs, runs, seed};
      const CampaignReport report = run_campaign(campaign);
      row.mean = report.checkpoints.back().mean;
      row.std_error = report.checkpoints.back().std_error;
    }
    rows.push_back(row);
  }
  BatchScanRow limit;
  limit.exact =
      std::visit([](const auto& p) { return limit_rejections(p); }, pair);
  limit.mean = kNaN;
  limit.std_error = kNaN;
  rows.push_back(limit);
  return rows;
}

}  // namespace speclab
