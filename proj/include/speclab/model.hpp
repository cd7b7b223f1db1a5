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
#include <span>
#include <utility>
#include <vector>

#include "speclab/dist.hpp"

namespace speclab {

// Upper bound on V^T for models and oracles that tabulate whole histories.
inline constexpr std::size_t kMaxTabulatedSequences = 1'000'000;

class InvalidModel : public Error {
 public:
  using Error::Error;
};

class SizeCapExceeded : public Error {
 public:
  using Error::Error;
};

/// A token model over a fixed vocabulary and horizon T.
///
/// Histories passed to next() always start with the prompt token x_0, so the
/// distribution of x_n is next(n, {x_0, ..., x_{n-1}}) for n in 1..T.
class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  virtual std::size_t vocab_size() const = 0;
  virtual std::size_t horizon() const = 0;
  virtual const Dist& prompt() const = 0;
  virtual const Dist& next(std::size_t step,
                           std::span<const Token> history) const = 0;
};

/// rows[s] is the next-token distribution given current token s.
class CondDist {
 public:
  CondDist() = default;
  explicit CondDist(std::vector<Dist> rows);

  std::size_t size() const { return rows_.size(); }
  const Dist& row(Token s) const { return rows_[s]; }
  const std::vector<Dist>& rows() const { return rows_; }

 private:
  std::vector<Dist> rows_;
};

/// Nonstationary first-order chain: x_0 ~ prompt, x_n ~ steps[n-1].row(x_{n-1}).
class MarkovModel final : public ConditionalModel {
 public:
  MarkovModel(Dist prompt, std::vector<CondDist> steps);

  std::size_t vocab_size() const override { return prompt_.size(); }
  std::size_t horizon() const override { return steps_.size(); }
  const Dist& prompt() const override { return prompt_; }
  const Dist& next(std::size_t step,
                   std::span<const Token> history) const override;

  /// Transition table for step n in 1..T.
  const CondDist& step(std::size_t n) const { return steps_[n - 1]; }

 private:
  Dist prompt_;
  std::vector<CondDist> steps_;
};

/// General history-dependent model with one table entry per history.
///
/// tables[n-1] holds V^n rows indexed by history_index({x_0..x_{n-1}}).
/// Construction enforces V^T <= kMaxTabulatedSequences.
class FullModel final : public ConditionalModel {
 public:
  FullModel(Dist prompt, std::vector<std::vector<Dist>> tables);

  static FullModel from_markov(const MarkovModel& chain);

  std::size_t vocab_size() const override { return prompt_.size(); }
  std::size_t horizon() const override { return tables_.size(); }
  const Dist& prompt() const override { return prompt_; }
  const Dist& next(std::size_t step,
                   std::span<const Token> history) const override;

  /// Row for step n addressed directly by history index.
  const Dist& row(std::size_t step, std::size_t history_index) const {
    return tables_[step - 1][history_index];
  }

 private:
  Dist prompt_;
  std::vector<std::vector<Dist>> tables_;
};

/// Draft model p and target model q sharing vocabulary and horizon.
template <class Model>
struct ModelPair {
  Model draft;
  Model target;

  ModelPair(Model draft_model, Model target_model)
      : draft(std::move(draft_model)), target(std::move(target_model)) {
    if (draft.vocab_size() != target.vocab_size() ||
        draft.horizon() != target.horizon()) {
      throw InvalidModel("draft and target must share vocabulary and horizon");
    }
  }

  std::size_t vocab_size() const { return target.vocab_size(); }
  std::size_t horizon() const { return target.horizon(); }
};

using MarkovPair = ModelPair<MarkovModel>;
using FullPair = ModelPair<FullModel>;

/// Non-owning view over any ModelPair, used by the samplers.
struct PairView {
  const ConditionalModel& draft;
  const ConditionalModel& target;

  template <class Model>
  PairView(const ModelPair<Model>& pair)  // NOLINT: implicit by intent
      : draft(pair.draft), target(pair.target) {}
  PairView(const ConditionalModel& d, const ConditionalModel& t)
      : draft(d), target(t) {}

  std::size_t vocab_size() const { return target.vocab_size(); }
  std::size_t horizon() const { return target.horizon(); }
};

FullPair lift_to_full(const MarkovPair& pair);

/// Base-V index of a token sequence, first token most significant.
std::size_t sequence_index(std::span<const Token> tokens, std::size_t vocab);
std::vector<Token> sequence_from_index(std::size_t index, std::size_t length,
                                       std::size_t vocab);

/// V^length, throwing SizeCapExceeded above kMaxTabulatedSequences.
std::size_t checked_power(std::size_t vocab, std::size_t length);

/// Probability of x_{1:T} under the chain rule, marginalizing the prompt.
double joint_probability(const ConditionalModel& model,
                         std::span<const Token> trajectory);

/// Exact law of x_{1:T} as a flat table indexed by sequence_index.
std::vector<double> joint_distribution(const ConditionalModel& model);

/// Marginals of x_0..x_T under the chain: mu_0 = prompt,
/// mu_n(x) = sum_s mu_{n-1}(s) q_n(x|s). Returns T + 1 entries.
std::vector<Dist> target_marginals(const MarkovModel& chain);

/// Row-stochastic tables from normalized uniform draws, uniform prompt.
MarkovModel random_markov_model(std::uint64_t seed, std::size_t vocab,
                                std::size_t horizon);

/// History-dependent tables from normalized uniform draws, random prompt.
FullModel random_full_model(std::uint64_t seed, std::size_t vocab,
                            std::size_t horizon);

}  // namespace speclab
