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

#include "speclab/model.hpp"

#include <algorithm>
#include <string>

#include "speclab/rng.hpp"

namespace speclab {

namespace {

void require_vocab(const Dist& d, std::size_t vocab, const char* what) {
  if (d.size() != vocab) {
    throw InvalidModel(std::string(what) + " has " + std::to_string(d.size()) +
                       " entries, vocabulary has " + std::to_string(vocab));
  }
}

void require_history(std::size_t step, std::span<const Token> history,
                     std::size_t horizon) {
  if (step < 1 || step > horizon) {
    throw InvalidModel("step " + std::to_string(step) + " outside 1.." +
                       std::to_string(horizon));
  }
  if (history.size() != step) {
    throw InvalidModel("history for step " + std::to_string(step) +
                       " must hold x_0..x_" + std::to_string(step - 1));
  }
}

Dist random_row(Rng& rng, std::size_t vocab) {
  std::vector<double> weights(vocab);
  for (double& w : weights) w = rng.uniform();
  return Dist::from_weights(std::move(weights));
}

}  // namespace

CondDist::CondDist(std::vector<Dist> rows) : rows_(std::move(rows)) {
  for (const Dist& row : rows_) require_vocab(row, rows_.size(), "row");
}

MarkovModel::MarkovModel(Dist prompt, std::vector<CondDist> steps)
    : prompt_(std::move(prompt)), steps_(std::move(steps)) {
  if (steps_.empty()) throw InvalidModel("horizon must be at least 1");
  for (const CondDist& step : steps_) {
    if (step.size() != prompt_.size()) {
      throw InvalidModel("transition table size differs from vocabulary");
    }
  }
}

const Dist& MarkovModel::next(std::size_t step,
                              std::span<const Token> history) const {
  require_history(step, history, horizon());
  return steps_[step - 1].row(history.back());
}

FullModel::FullModel(Dist prompt, std::vector<std::vector<Dist>> tables)
    : prompt_(std::move(prompt)), tables_(std::move(tables)) {
  const std::size_t vocab = prompt_.size();
  if (tables_.empty()) throw InvalidModel("horizon must be at least 1");
  checked_power(vocab, tables_.size());
  std::size_t expected = 1;
  for (const auto& table : tables_) {
    expected *= vocab;
    if (table.size() != expected) {
      throw InvalidModel("history table has " + std::to_string(table.size()) +
                         " rows, expected " + std::to_string(expected));
    }
    for (const Dist& row : table) require_vocab(row, vocab, "row");
  }
}

FullModel FullModel::from_markov(const MarkovModel& chain) {
  const std::size_t vocab = chain.vocab_size();
  checked_power(vocab, chain.horizon());
  std::vector<std::vector<Dist>> tables;
  std::size_t histories = 1;
  for (std::size_t n = 1; n <= chain.horizon(); ++n) {
    histories *= vocab;
    std::vector<Dist> table;
    table.reserve(histories);
    // Last history token is the least significant digit.
    for (std::size_t h = 0; h < histories; ++h) {
      table.push_back(chain.step(n).row(static_cast<Token>(h % vocab)));
    }
    tables.push_back(std::move(table));
  }
  return FullModel(chain.prompt(), std::move(tables));
}

const Dist& FullModel::next(std::size_t step,
                            std::span<const Token> history) const {
  require_history(step, history, horizon());
  return tables_[step - 1][sequence_index(history, vocab_size())];
}

FullPair lift_to_full(const MarkovPair& pair) {
  return FullPair(FullModel::from_markov(pair.draft),
                  FullModel::from_markov(pair.target));
}

std::size_t sequence_index(std::span<const Token> tokens, std::size_t vocab) {
  std::size_t index = 0;
  for (Token t : tokens) index = index * vocab + t;
  return index;
}

std::vector<Token> sequence_from_index(std::size_t index, std::size_t length,
                                       std::size_t vocab) {
  std::vector<Token> tokens(length);
  for (std::size_t i = length; i-- > 0;) {
    tokens[i] = static_cast<Token>(index % vocab);
    index /= vocab;
  }
  return tokens;
}

std::size_t checked_power(std::size_t vocab, std::size_t length) {
  std::size_t result = 1;
  for (std::size_t i = 0; i < length; ++i) {
    if (result > kMaxTabulatedSequences / vocab) {
      throw SizeCapExceeded("V^T exceeds " +
                            std::to_string(kMaxTabulatedSequences));
    }
    result *= vocab;
  }
  return result;
}

double joint_probability(const ConditionalModel& model,
                         std::span<const Token> trajectory) {
  const std::size_t horizon = model.horizon();
  if (trajectory.size() != horizon) {
    throw LengthMismatch("trajectory length " +
                         std::to_string(trajectory.size()) +
                         " differs from horizon " + std::to_string(horizon));
  }
  for (Token t : trajectory) {
    if (t >= model.vocab_size()) throw InvalidModel("token outside vocabulary");
  }
  std::vector<Token> history(horizon + 1);
  std::copy(trajectory.begin(), trajectory.end(), history.begin() + 1);
  CompensatedSum total;
  for (std::size_t x0 = 0; x0 < model.vocab_size(); ++x0) {
    double prob = model.prompt()[x0];
    history[0] = static_cast<Token>(x0);
    for (std::size_t n = 1; n <= horizon && prob > 0.0; ++n) {
      prob *= model.next(n, std::span(history).first(n))[history[n]];
    }
    total += prob;
  }
  return total.value();
}

std::vector<double> joint_distribution(const ConditionalModel& model) {
  const std::size_t vocab = model.vocab_size();
  const std::size_t horizon = model.horizon();
  const std::size_t count = checked_power(vocab, horizon);
  // Forward pass over histories including x_0; level n has V^(n+1) entries.
  std::vector<double> mass(model.prompt().begin(), model.prompt().end());
  std::vector<Token> history;
  for (std::size_t n = 1; n <= horizon; ++n) {
    std::vector<double> next_mass(mass.size() * vocab, 0.0);
    for (std::size_t h = 0; h < mass.size(); ++h) {
      if (mass[h] == 0.0) continue;
      history = sequence_from_index(h, n, vocab);
      const Dist& row = model.next(n, history);
      for (std::size_t x = 0; x < vocab; ++x) {
        next_mass[h * vocab + x] = mass[h] * row[x];
      }
    }
    mass = std::move(next_mass);
  }
  // Marginalize x_0, the most significant digit.
  std::vector<double> joint(count, 0.0);
  std::vector<CompensatedSum> sums(count);
  for (std::size_t h = 0; h < mass.size(); ++h) sums[h % count] += mass[h];
  for (std::size_t i = 0; i < count; ++i) joint[i] = sums[i].value();
  return joint;
}

std::vector<Dist> target_marginals(const MarkovModel& chain) {
  const std::size_t vocab = chain.vocab_size();
  std::vector<Dist> marginals{chain.prompt()};
  for (std::size_t n = 1; n <= chain.horizon(); ++n) {
    const Dist& prev = marginals.back();
    std::vector<CompensatedSum> sums(vocab);
    for (std::size_t s = 0; s < vocab; ++s) {
      if (prev[s] == 0.0) continue;
      const Dist& row = chain.step(n).row(static_cast<Token>(s));
      for (std::size_t x = 0; x < vocab; ++x) sums[x] += prev[s] * row[x];
    }
    std::vector<double> probs(vocab);
    for (std::size_t x = 0; x < vocab; ++x) probs[x] = sums[x].value();
    marginals.push_back(Dist::from_weights(std::move(probs)));
  }
  return marginals;
}

MarkovModel random_markov_model(std::uint64_t seed, std::size_t vocab,
                                std::size_t horizon) {
  if (vocab == 0 || horizon == 0) {
    throw InvalidModel("vocabulary and horizon must be positive");
  }
  Rng rng(seed);
  std::vector<CondDist> steps;
  steps.reserve(horizon);
  for (std::size_t n = 0; n < horizon; ++n) {
    std::vector<Dist> rows;
    rows.reserve(vocab);
    for (std::size_t s = 0; s < vocab; ++s) rows.push_back(random_row(rng, vocab));
    steps.emplace_back(std::move(rows));
  }
  return MarkovModel(Dist::uniform(vocab), std::move(steps));
}

FullModel random_full_model(std::uint64_t seed, std::size_t vocab,
                            std::size_t horizon) {
  checked_power(vocab, horizon);
  Rng rng(seed);
  Dist prompt = random_row(rng, vocab);
  std::vector<std::vector<Dist>> tables;
  std::size_t histories = 1;
  for (std::size_t n = 0; n < horizon; ++n) {
    histories *= vocab;
    std::vector<Dist> table;
    table.reserve(histories);
    for (std::size_t h = 0; h < histories; ++h) {
      table.push_back(random_row(rng, vocab));
    }
    tables.push_back(std::move(table));
  }
  return FullModel(std::move(prompt), std::move(tables));
}

}  // namespace speclab
