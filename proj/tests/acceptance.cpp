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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance <path to speclab binary> <configs dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "speclab/enumerate.hpp"
#include "speclab/exact.hpp"
#include "speclab/montecarlo.hpp"
#include "speclab/tradeoff.hpp"
#include "support/instances.hpp"

namespace {

using namespace speclab;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = seconds_since(start);
  if (!out.pass) ++failures;
  std::cout << (out.pass ? "PASS " : "FAIL ") << name << " | " << out.detail
            << " | " << fmt("%.1fs", elapsed) << std::endl;
}

constexpr std::uint64_t kInstanceSeed = 20240611;

Outcome unbiasedness() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::size_t checks = 0;
  for (const auto& inst : testing::small_instances(50, kInstanceSeed)) {
    const auto target = joint_distribution(inst.full.target);
    worst = std::max(worst, l1_distance(enumerate_output_distribution(inst.full, SpeculativeAlgorithm{}), target));
    for (std::size_t m : {2, 3}) {
      worst = std::max(worst, l1_distance(enumerate_output_distribution(inst.full, BatchAlgorithm{m}), target));
    }
    checks += 3;
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-10 && elapsed < 60.0,
          std::to_string(checks) + " laws, max L1 " + fmt("%.3g", worst) +
              " (tol 1e-10), runtime " + fmt("%.2fs", elapsed) + " (limit 60s)"};
}

Outcome sd_formula() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (const auto& inst : testing::small_instances(50, kInstanceSeed)) {
    const double enumerated = enumerate_expected_rejections(inst.full, SpeculativeAlgorithm{});
    worst = std::max(worst, std::abs(expected_rejections_sd(inst.full) - enumerated));
    if (inst.is_markov) {
      worst = std::max(worst, std::abs(expected_rejections_sd(inst.markov) - enumerated));
    }
  }
  const MarkovPair pair(random_markov_model(1, 7, 50), random_markov_model(2, 7, 50));
  Campaign campaign{pair, SpeculativeAlgorithm{}, 10'000, 100, 2024};
  const Checkpoint last = run_campaign(campaign).checkpoints.back();
  const double z = std::abs(last.mean - last.exact) / last.std_error;
  const double elapsed = seconds_since(start);
  return {worst <= 1e-12 && z <= 3.0 && elapsed < 120.0,
          "max |formula - enumeration| " + fmt("%.3g", worst) +
              " (tol 1e-12); V=7,T=50 N=1e4 mean " + fmt("%.4f", last.mean) +
              " exact " + fmt("%.4f", last.exact) + " z " + fmt("%.2f", z) +
              " (tol 3); runtime " + fmt("%.2fs", elapsed) + " (limit 120s)"};
}

Outcome batch_formula() {
  double worst = 0.0;
  double min_improvement = INFINITY;
  double m1_max = 0.0;
  for (const auto& inst : testing::small_instances(50, kInstanceSeed)) {
    for (std::size_t m = 1; m <= 3; ++m) {
      const double enumerated = enumerate_expected_rejections(inst.full, BatchAlgorithm{m});
      const BatchRejections full = expected_rejections_batch(inst.full, m);
      worst = std::max(worst, std::abs(full.total - enumerated));
      min_improvement = std::min(min_improvement, full.improvement);
      if (m == 1) m1_max = std::max(m1_max, std::abs(full.improvement));
      if (inst.is_markov) {
        const BatchRejections chain = expected_rejections_batch(inst.markov, m);
        worst = std::max(worst, std::abs(chain.total - enumerated));
        min_improvement = std::min(min_improvement, chain.improvement);
        if (m == 1) m1_max = std::max(m1_max, std::abs(chain.improvement));
      }
    }
  }
  return {worst <= 1e-12 && min_improvement >= 0.0 && m1_max == 0.0,
          "max |formula - enumeration| " + fmt("%.3g", worst) +
              " (tol 1e-12); min improvement " + fmt("%.3g", min_improvement) +
              " (>= 0); max |M=1 improvement| " + fmt("%.3g", m1_max) + " (== 0)"};
}

MarkovPair single_token_pair(const Dist& p, const Dist& q) {
  const Dist prompt = Dist::uniform(p.size());
  return MarkovPair(MarkovModel(prompt, {CondDist(std::vector<Dist>(p.size(), p))}),
                    MarkovModel(prompt, {CondDist(std::vector<Dist>(q.size(), q))}));
}

Outcome closed_forms() {
  const double uniform = batch_improvement_uniform(2.0, 2);
  const double uniform_general =
      expected_rejections_batch(single_token_pair(Dist::uniform(4), Dist({0.5, 0.5, 0, 0})), 2)
          .improvement;
  const double bern = batch_improvement_bernoulli(0.8, 0.5, 3);
  const double bern_general =
      expected_rejections_batch(single_token_pair(Dist({0.2, 0.8}), Dist({0.5, 0.5})), 3)
          .improvement;
  const bool pass = std::abs(uniform - 0.25) <= 1e-12 &&
                    std::abs(uniform - uniform_general) <= 1e-12 &&
                    std::abs(bern - 0.108) <= 1e-12 &&
                    std::abs(bern - bern_general) <= 1e-12;
  return {pass, "uniform(r=2,M=2) " + fmt("%.15g", uniform) + " general " +
                    fmt("%.15g", uniform_general) + "; bernoulli(0.8,0.5,3) " +
                    fmt("%.15g", bern) + " general " + fmt("%.15g", bern_general) +
                    " (tol 1e-12)"};
}

Outcome limit() {
  bool pass = true;
  std::size_t positive = 0;
  std::size_t zero = 0;
  double worst_gap = INFINITY;
  double worst_rise = -INFINITY;
  for (const auto& inst : testing::small_instances(50, kInstanceSeed + 1, 2)) {
    const double lim = limit_rejections(inst.full);
    double previous = INFINITY;
    for (std::size_t m = 1; m <= 8; ++m) {
      const double value = expected_rejections_batch(inst.full, m).total;
      worst_gap = std::min(worst_gap, value - lim);
      worst_rise = std::max(worst_rise, value - previous);
      previous = value;
    }
    const bool differs = expected_rejections_sd(inst.full) > 0.0;
    if (differs) {
      pass = pass && lim > 0.0;
      positive += lim > 0.0;
    } else {
      pass = pass && lim == 0.0;
      zero += lim == 0.0;
    }
  }
  pass = pass && worst_gap >= -1e-12 && worst_rise <= 1e-12;
  return {pass, "min batch(M<=8) - limit " + fmt("%.3g", worst_gap) +
                    " (>= -1e-12); max rise in M " + fmt("%.3g", worst_rise) +
                    " (<= 1e-12); limit > 0 on " + std::to_string(positive) +
                    " differing instances, == 0 on " + std::to_string(zero) +
                    " identical; instances have T in 2..4"};
}

Outcome lower_bound() {
  double worst = INFINITY;
  double closest = INFINITY;
  double worst_bias = 0.0;
  const auto instances = testing::small_instances(20, kInstanceSeed + 2);
  // Acceptance scaled down from SD by a factor drawn from [scale, 1].
  constexpr double kScales[] = {0.0, 0.5, 0.9, 0.99};
  for (std::size_t k = 0; k < 100; ++k) {
    const auto& inst = instances[k % instances.size()];
    const EnumerationResult r =
        enumerate_algorithm(inst.full, GenericAlgorithm{random_unbiased_policy(
                                           1000 + k, kScales[k % std::size(kScales)])});
    const double gap = r.expected_rejections - expected_rejections_sd(inst.full);
    worst = std::min(worst, gap);
    if (gap > 0.0) closest = std::min(closest, gap);
    worst_bias = std::max(worst_bias, l1_distance(r.joint, joint_distribution(inst.full.target)));
  }
  return {worst >= -1e-10 && worst_bias <= 1e-10,
          "100 policies, min E[N_rej] - SD " + fmt("%.3g", worst) +
              ", closest " + fmt("%.3g", closest) +
              " (>= -1e-10); max output L1 to target " + fmt("%.3g", worst_bias)};
}

Outcome pareto() {
  Rng rng(kInstanceSeed + 3);
  auto random_dist = [&](std::size_t vocab) {
    std::vector<double> w(vocab);
    for (double& x : w) x = rng.uniform();
    return Dist::from_weights(std::move(w));
  };
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.1 * i);
  double identity = 0.0;
  double below = INFINITY;
  double canonical = 0.0;
  double endpoints = 0.0;
  std::size_t residuals = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t vocab = 2 + static_cast<std::size_t>(rng.uniform() * 5);
    const Dist p = random_dist(vocab);
    const Dist q = random_dist(vocab);
    const double tv = tv_distance(p, q);
    const auto front = pareto_front(p, q, grid);
    for (const ParetoPoint& pt : front) {
      identity = std::max(identity, std::abs(pt.reject_prob + pt.loss_star - tv));
    }
    endpoints = std::max({endpoints, std::abs(front.front().reject_prob - tv),
                          std::abs(front.front().loss_star),
                          std::abs(front.back().reject_prob),
                          std::abs(front.back().loss_star - tv)});
    for (double eps : grid) {
      const AcceptanceFn b = epsilon_acceptance(p, q, eps);
      if (rejection_probability(b, p) < 1e-9) continue;
      const double loss = loss_tv_star(b, p, q);
      const Dist best = optimal_residual(b, p, q).canonical;
      canonical = std::max(
          canonical, std::abs(tv_distance(induced_output_distribution(b, best, p, q), q) - loss));
      for (int k = 0; k < 10'000 / 11; ++k) {
        const double tv_k = tv_distance(induced_output_distribution(b, random_dist(vocab), p, q), q);
        below = std::min(below, tv_k - loss);
        ++residuals;
      }
    }
  }
  return {identity <= 1e-12 && below >= -1e-12 && canonical <= 1e-12 && endpoints <= 1e-12,
          "50 pairs x 11 eps: max identity error " + fmt("%.3g", identity) +
              "; " + std::to_string(residuals) + " random residuals, min TV - loss* " +
              fmt("%.3g", below) + " (>= -1e-12); canonical error " + fmt("%.3g", canonical) +
              "; endpoint error " + fmt("%.3g", endpoints)};
}

Outcome statistical() {
  const auto start = Clock::now();
  const MarkovPair pair(random_markov_model(301, 2, 3), random_markov_model(302, 2, 3));
  const auto sd = unbiasedness_check(pair, SpeculativeAlgorithm{}, 1'000'000, 11);
  const auto batch = unbiasedness_check(pair, BatchAlgorithm{2}, 1'000'000, 12);
  const Policy accept_all{[](const StepContext&, Token) { return 1.0; },
                          [](const StepContext& ctx) { return ctx.target; }};
  const auto control = unbiasedness_check(pair, GenericAlgorithm{accept_all}, 1'000'000, 13);
  const double elapsed = seconds_since(start);
  return {sd.pass && batch.pass && !control.pass && elapsed < 300.0,
          "N=1e6 L1: sd " + fmt("%.4f", sd.l1) + ", batch(M=2) " + fmt("%.4f", batch.l1) +
              " (<= 0.02 to pass); accept-all control " + fmt("%.4f", control.l1) +
              " (must fail); runtime " + fmt("%.2fs", elapsed) + " (limit 300s)"};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome reproducibility(const std::string& binary, const std::string& configs) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "speclab_acceptance";
  fs::create_directories(dir);
  struct Run {
    std::string command;
    std::string config;
    std::string extra;
  };
  const std::vector<Run> runs{{"simulate", "random_v7_t50.json", ""},
                              {"simulate", "batch_small.json", "--format json"},
                              {"batch-scan", "random_v7_t50.json", "--runs 1000"},
                              {"exact", "random_v7_t50.json", ""},
                              {"pareto", "pareto_two_token.json", ""}};
  std::size_t identical = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::string first;
    std::string second;
    for (int k = 0; k < 2; ++k) {
      const fs::path out = dir / ("run" + std::to_string(i) + "_" + std::to_string(k));
      const std::string cmd = "\"" + binary + "\" " + runs[i].command +
                              " --config \"" + configs + "/" + runs[i].config +
                              "\" " + runs[i].extra + " --out \"" + out.string() + "\"";
      if (std::system(cmd.c_str()) != 0) {
        return {false, "command failed: " + cmd};
      }
      (k == 0 ? first : second) = slurp(out);
    }
    identical += !first.empty() && first == second;
  }
  return {identical == runs.size(),
          std::to_string(identical) + "/" + std::to_string(runs.size()) +
              " commands byte-identical across two invocations"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <speclab binary> <configs dir>\n";
    return 2;
  }
  const std::string binary = argv[1];
  const std::string configs = argv[2];
  report("unbiasedness: enumerated SD and batch(M=2,3) laws equal the target", unbiasedness);
  report("speculative expected rejections: formula vs enumeration and Monte Carlo", sd_formula);
  report("batch expected rejections: history and chain recursions vs enumeration", batch_formula);
  report("batch improvement closed forms vs general recursion", closed_forms);
  report("batch limit: lower bound, monotone approach, positivity", limit);
  report("lower bound: unbiased random policies never beat SD", lower_bound);
  report("pareto identity, optimality of loss*, canonical residual, endpoints", pareto);
  report("statistical unbiasedness at N=1e6 with biased control", statistical);
  report("CLI reproducibility", [&] { return reproducibility(binary, configs); });
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
