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
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "speclab/dist.hpp"
#include "speclab/model.hpp"
#include "speclab/rng.hpp"

namespace speclab {

class InvalidPolicy : public Error {
 public:
  using Error::Error;
};

struct Trajectory {
  Token prompt = 0;           // x_0
  std::vector<Token> tokens;  // x_1..x_T
};

struct RunStats {
  std::size_t rejections = 0;
  // Charged once per rejection; the initial drafting pass is free.
  std::size_t oracle_calls = 0;
  // Verification passes actually executed, including a final all-accept one.
  std::size_t rounds = 0;
  std::vector<std::uint8_t> rejected;  // R_n for n = 1..T
};

struct DecodeResult {
  Trajectory trajectory;
  RunStats stats;
};

/// What a policy sees when deciding about position `step`: the accepted
/// history x_0..x_{step-1} and both models' rows at that history.
struct StepContext {
  std::size_t step;
  std::span<const Token> history;
  const Dist& draft;
  const Dist& target;
};

/// Acceptance probability b and rejection distribution for the generic
/// rejection-based decoder. Acceptance values are clamped into [0, 1].
struct Policy {
  std::function<double(const StepContext&, Token candidate)> acceptance;
  std::function<Dist(const StepContext&)> residual;
};

/// b = min{1, q/p} (1 where p = 0), residual [q - p]_+.
Policy speculative_policy();

/// Acceptance u * min{1, q/p} with u uniform on [min_scale, 1] per (seed,
/// step, last history token, candidate), and residual
/// (q - b p) / sum (1 - b) p. The output law stays q for every seed.
Policy random_unbiased_policy(std::uint64_t seed, double min_scale = 0.0);

/// Acceptance min{1, q(x)/p(x)}, with 1 where p(x) = 0.
double speculative_acceptance(const Dist& draft, const Dist& target,
                              Token candidate);

/// x_n ~ q(.|x_{0:n-1}) for n = 1..T. Costs T oracle calls by convention.
Trajectory autoregressive_decode(const ConditionalModel& target, Rng& rng);

/// Standard speculative decoding with lookahead to the horizon.
DecodeResult speculative_decode(PairView pair, Rng& rng);

/// Rejection-based decoding with a caller-supplied policy. Consumes the rng
/// in the same order as speculative_decode.
DecodeResult generic_decode(PairView pair, const Policy& policy, Rng& rng);

/// Batch speculative sampling with `batch` parallel draft responses.
/// batch == 1 reproduces speculative_decode draw for draw.
DecodeResult batch_decode(PairView pair, std::size_t batch, Rng& rng);

struct SpeculativeAlgorithm {};
struct BatchAlgorithm {
  std::size_t batch = 1;
};
struct GenericAlgorithm {
  Policy policy;
  std::string name = "generic";
};
struct AutoregressiveAlgorithm {};

using Algorithm = std::variant<SpeculativeAlgorithm, BatchAlgorithm,
                               GenericAlgorithm, AutoregressiveAlgorithm>;

std::string algorithm_name(const Algorithm& algorithm);

/// Dispatches to the matching sampler. Autoregressive runs report zero
/// rejections and T oracle calls.
DecodeResult run_algorithm(PairView pair, const Algorithm& algorithm, Rng& rng);

}  // namespace speclab
