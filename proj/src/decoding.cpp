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

#include "speclab/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace speclab {

namespace {

void draft_to_horizon(const ConditionalModel& draft, std::vector<Token>& seq,
                      std::size_t from, Rng& rng) {
  const std::size_t horizon = draft.horizon();
  for (std::size_t t = from; t <= horizon; ++t) {
    seq[t] = sample_token(draft.next(t, std::span(seq).first(t)), rng.uniform());
  }
}

DecodeResult finish(std::vector<Token>& seq, RunStats stats) {
  stats.oracle_calls = stats.rejections;
  DecodeResult result;
  result.trajectory.prompt = seq[0];
  result.trajectory.tokens.assign(seq.begin() + 1, seq.end());
  result.stats = std::move(stats);
  return result;
}

// Rounds of draft-to-horizon followed by sequential verification. `accept`
// returns b for a candidate, `residual` the rejection distribution.
template <class Accept, class Residual>
DecodeResult decode_rounds(PairView pair, Rng& rng, Accept&& accept,
                           Residual&& residual) {
  const std::size_t horizon = pair.horizon();
  RunStats stats;
  stats.rejected.assign(horizon, 0);
  std::vector<Token> seq(horizon + 1);
  seq[0] = sample_token(pair.target.prompt(), rng.uniform());

  std::size_t n = 1;
  while (n <= horizon) {
    ++stats.rounds;
    draft_to_horizon(pair.draft, seq, n, rng);
    for (std::size_t t = n; t <= horizon; ++t) {
      const auto history = std::span<const Token>(seq).first(t);
      const StepContext ctx{t, history, pair.draft.next(t, history),
                            pair.target.next(t, history)};
      const double u = rng.uniform();
      n = t + 1;
      if (u <= accept(ctx, seq[t])) continue;
      seq[t] = sample_token(residual(ctx), rng.uniform());
      ++stats.rejections;
      stats.rejected[t - 1] = 1;
      break;
    }
  }
  return finish(seq, std::move(stats));
}

}  // namespace

double speculative_acceptance(const Dist& draft, const Dist& target,
                              Token candidate) {
  const double p = draft[candidate];
  if (p <= 0.0) return 1.0;
  return std::min(1.0, target[candidate] / p);
}

Policy speculative_policy() {
  return Policy{
      [](const StepContext& ctx, Token candidate) {
        return speculative_acceptance(ctx.draft, ctx.target, candidate);
      },
      [](const StepContext& ctx) { return residual_plus(ctx.target, ctx.draft); }};
}

Policy random_unbiased_policy(std::uint64_t seed, double min_scale) {
  if (!(min_scale >= 0.0 && min_scale <= 1.0)) {
    throw InvalidPolicy("min_scale must lie in [0, 1]");
  }
  auto scale = [seed, min_scale](const StepContext& ctx, Token candidate) {
    std::uint64_t key = splitmix64(seed ^ splitmix64(ctx.step));
    key = splitmix64(key ^ splitmix64(ctx.history.back() + 0x9e37u));
    key = splitmix64(key ^ splitmix64(candidate + 0x7f4a7c15u));
    const double u = static_cast<double>(key >> 11) * 0x1.0p-53;
    return min_scale + (1.0 - min_scale) * u;
  };
  auto acceptance = [scale](const StepContext& ctx, Token candidate) {
    return scale(ctx, candidate) *
           speculative_acceptance(ctx.draft, ctx.target, candidate);
  };
  return Policy{
      acceptance, [acceptance](const StepContext& ctx) {
        const std::size_t vocab = ctx.target.size();
        std::vector<double> weights(vocab);
        double total = 0.0;
        for (std::size_t x = 0; x < vocab; ++x) {
          const double b = acceptance(ctx, static_cast<Token>(x));
          weights[x] = std::max(0.0, ctx.target[x] - b * ctx.draft[x]);
          total += weights[x];
        }
        if (total < kZeroTv) return ctx.target;
        return Dist::from_weights(std::move(weights));
      }};
}

Trajectory autoregressive_decode(const ConditionalModel& target, Rng& rng) {
  const std::size_t horizon = target.horizon();
  std::vector<Token> seq(horizon + 1);
  seq[0] = sample_token(target.prompt(), rng.uniform());
  for (std::size_t n = 1; n <= horizon; ++n) {
    seq[n] = sample_token(target.next(n, std::span(seq).first(n)), rng.uniform());
  }
  return Trajectory{seq[0], std::vector<Token>(seq.begin() + 1, seq.end())};
}

DecodeResult speculative_decode(PairView pair, Rng& rng) {
  return decode_rounds(
      pair, rng,
      [](const StepContext& ctx, Token candidate) {
        return speculative_acceptance(ctx.draft, ctx.target, candidate);
      },
      [](const StepContext& ctx) { return residual_plus(ctx.target, ctx.draft); });
}

DecodeResult generic_decode(PairView pair, const Policy& policy, Rng& rng) {
  if (!policy.acceptance || !policy.residual) {
    throw InvalidPolicy("policy must define acceptance and residual");
  }
  const std::size_t vocab = pair.vocab_size();
  return decode_rounds(
      pair, rng,
      [&](const StepContext& ctx, Token candidate) {
        const double b = policy.acceptance(ctx, candidate);
        if (!std::isfinite(b)) {
          throw InvalidPolicy("acceptance probability is not finite at step " +
                              std::to_string(ctx.step));
        }
        return std::clamp(b, 0.0, 1.0);
      },
      [&](const StepContext& ctx) {
        Dist d;
        try {
          d = policy.residual(ctx);
        } catch (const InvalidDistribution& e) {
          throw InvalidPolicy(std::string("residual: ") + e.what());
        }
        if (d.size() != vocab) {
          throw InvalidPolicy("residual distribution has wrong vocabulary size");
        }
        return d;
      });
}

DecodeResult batch_decode(PairView pair, std::size_t batch, Rng& rng) {
  if (batch == 0) throw InvalidPolicy("batch size must be at least 1");
  const std::size_t horizon = pair.horizon();
  RunStats stats;
  stats.rejected.assign(horizon, 0);
  std::vector<Token> seq(horizon + 1);
  seq[0] = sample_token(pair.target.prompt(), rng.uniform());
  std::vector<std::vector<Token>> responses(batch,
                                            std::vector<Token>(horizon + 1));

  std::size_t n = 1;
  while (n <= horizon) {
    ++stats.rounds;
    const std::size_t root = n;
    for (auto& response : responses) {
      std::copy(seq.begin(), seq.begin() + root, response.begin());
      draft_to_horizon(pair.draft, response, root, rng);
    }

    const auto root_history = std::span<const Token>(seq).first(root);
    const Dist& root_draft = pair.draft.next(root, root_history);
    Dist root_target = pair.target.next(root, root_history);  // q^m

    bool accepted = false;
    for (std::size_t m = 0; m < batch && !accepted; ++m) {
      const std::vector<Token>& response = responses[m];
      const double u = rng.uniform();
      if (u > speculative_acceptance(root_draft, root_target, response[root])) {
        root_target = residual_plus(root_target, root_draft);
        continue;
      }
      accepted = true;
      seq[root] = response[root];
      n = root + 1;
      // Depth-first within this response only, against the original target.
      for (std::size_t t = root + 1; t <= horizon; ++t) {
        const auto history = std::span<const Token>(seq).first(t);
        const Dist& p = pair.draft.next(t, history);
        const Dist& q = pair.target.next(t, history);
        const double v = rng.uniform();
        n = t + 1;
        if (v <= speculative_acceptance(p, q, response[t])) {
          seq[t] = response[t];
          continue;
        }
        seq[t] = sample_token(residual_plus(q, p), rng.uniform());
        ++stats.rejections;
        stats.rejected[t - 1] = 1;
        break;
      }
    }
    if (!accepted) {
      // root_target now holds q^{M+1}.
      seq[root] = sample_token(root_target, rng.uniform());
      ++stats.rejections;
      stats.rejected[root - 1] = 1;
      n = root + 1;
    }
  }
  return finish(seq, std::move(stats));
}

std::string algorithm_name(const Algorithm& algorithm) {
  struct Visitor {
    std::string operator()(const SpeculativeAlgorithm&) const { return "sd"; }
    std::string operator()(const BatchAlgorithm& a) const {
      return "batch(M=" + std::to_string(a.batch) + ")";
    }
    std::string operator()(const GenericAlgorithm& a) const { return a.name; }
    std::string operator()(const AutoregressiveAlgorithm&) const {
      return "autoregressive";
    }
  };
  return std::visit(Visitor{}, algorithm);
}

DecodeResult run_algorithm(PairView pair, const Algorithm& algorithm, Rng& rng) {
  struct Visitor {
    PairView pair;
    Rng& rng;
    DecodeResult operator()(const SpeculativeAlgorithm&) const {
      return speculative_decode(pair, rng);
    }
    DecodeResult operator()(const BatchAlgorithm& a) const {
      return batch_decode(pair, a.batch, rng);
    }
    DecodeResult operator()(const GenericAlgorithm& a) const {
      return generic_decode(pair, a.policy, rng);
    }
    DecodeResult operator()(const AutoregressiveAlgorithm&) const {
      DecodeResult result;
      result.trajectory = autoregressive_decode(pair.target, rng);
      result.stats.oracle_calls = pair.horizon();
      result.stats.rounds = pair.horizon();
      result.stats.rejected.assign(pair.horizon(), 0);
      return result;
    }
  };
  return std::visit(Visitor{pair, rng}, algorithm);
}

}  // namespace speclab
