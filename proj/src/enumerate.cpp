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

#include "speclab/enumerate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace speclab {

namespace {

// Mass over (history x_0..x_{t-1}, root flag) for the position t being
// decided. Root states start a verification round (only batch cares).
struct Level {
  std::vector<CompensatedSum> inner;
  std::vector<CompensatedSum> root;
};

class Enumerator {
 public:
  Enumerator(PairView pair, const Algorithm& algorithm)
      : pair_(pair), algorithm_(algorithm), vocab_(pair.vocab_size()) {}

  EnumerationResult run() {
    const std::size_t horizon = pair_.horizon();
    const std::size_t count = checked_power(vocab_, horizon);

    Level level;
    level.inner.resize(vocab_);
    level.root.resize(vocab_);
    for (std::size_t x = 0; x < vocab_; ++x) level.root[x] += pair_.target.prompt()[x];

    for (std::size_t t = 1; t <= horizon; ++t) {
      const std::size_t histories = level.inner.size();
      Level next;
      next.inner.resize(histories * vocab_);
      next.root.resize(histories * vocab_);
      for (std::size_t h = 0; h < histories; ++h) {
        const double inner = level.inner[h].value();
        const double root = level.root[h].value();
        if (inner == 0.0 && root == 0.0) continue;
        history_ = sequence_from_index(h, t, vocab_);
        if (inner != 0.0) expand(t, h, inner, false, next);
        if (root != 0.0) expand(t, h, root, true, next);
      }
      level = std::move(next);
    }

    std::vector<CompensatedSum> sums(count);
    for (std::size_t h = 0; h < level.inner.size(); ++h) {
      sums[h % count] += level.inner[h].value();
      sums[h % count] += level.root[h].value();
    }
    EnumerationResult result;
    result.joint.resize(count);
    for (std::size_t i = 0; i < count; ++i) result.joint[i] = sums[i].value();
    result.expected_rejections = rejections_.value();
    return result;
  }

 private:
  void expand(std::size_t t, std::size_t h, double mass, bool root,
              Level& next) {
    const Dist& p = pair_.draft.next(t, history_);
    const Dist& q = pair_.target.next(t, history_);
    if (const auto* a = std::get_if<BatchAlgorithm>(&algorithm_);
        a && root) {
      expand_batch_root(h, mass, p, q, a->batch, next);
    } else if (const auto* g = std::get_if<GenericAlgorithm>(&algorithm_)) {
      expand_generic(t, h, mass, p, q, g->policy, next);
    } else if (std::holds_alternative<AutoregressiveAlgorithm>(algorithm_)) {
      for (std::size_t x = 0; x < vocab_; ++x) next.inner[h * vocab_ + x] += mass * q[x];
    } else {
      expand_speculative(h, mass, p, q, next);
    }
  }

  void expand_speculative(std::size_t h, double mass, const Dist& p,
                          const Dist& q, Level& next) {
    CompensatedSum rejected;
    for (std::size_t d = 0; d < vocab_; ++d) {
      if (p[d] == 0.0) continue;
      const double b = speculative_acceptance(p, q, static_cast<Token>(d));
      next.inner[h * vocab_ + d] += mass * p[d] * b;
      rejected += mass * p[d] * (1.0 - b);
    }
    const double rejection = rejected.value();
    if (rejection <= 0.0) return;
    Dist residual;
    try {
      residual = residual_plus(q, p);
    } catch (const ZeroResidual&) {
      if (rejection <= kZeroTv * mass) return;
      throw;
    }
    scatter(h, rejection, residual, next);
  }

  void expand_generic(std::size_t t, std::size_t h, double mass, const Dist& p,
                      const Dist& q, const Policy& policy, Level& next) {
    const StepContext ctx{t, history_, p, q};
    CompensatedSum rejected;
    for (std::size_t d = 0; d < vocab_; ++d) {
      if (p[d] == 0.0) continue;
      double b = policy.acceptance(ctx, static_cast<Token>(d));
      if (!std::isfinite(b)) {
        throw InvalidPolicy("acceptance probability is not finite at step " +
                            std::to_string(t));
      }
      b = std::clamp(b, 0.0, 1.0);
      next.inner[h * vocab_ + d] += mass * p[d] * b;
      rejected += mass * p[d] * (1.0 - b);
    }
    const double rejection = rejected.value();
    if (rejection <= 0.0) return;
    Dist residual;
    try {
      residual = policy.residual(ctx);
    } catch (const InvalidDistribution& e) {
      throw InvalidPolicy(std::string("residual: ") + e.what());
    }
    if (residual.size() != vocab_) {
      throw InvalidPolicy("residual distribution has wrong vocabulary size");
    }
    scatter(h, rejection, residual, next);
  }

  void expand_batch_root(std::size_t h, double mass, const Dist& p,
                         const Dist& q, std::size_t batch, Level& next) {
    Dist qm = q;
    double carry = mass;  // every response so far rejected at the root
    for (std::size_t m = 0; m < batch; ++m) {
      CompensatedSum rejected;
      for (std::size_t d = 0; d < vocab_; ++d) {
        if (p[d] == 0.0) continue;
        const double b = speculative_acceptance(p, qm, static_cast<Token>(d));
        next.inner[h * vocab_ + d] += carry * p[d] * b;
        rejected += carry * p[d] * (1.0 - b);
      }
      const double rejection = rejected.value();
      if (rejection <= 0.0) return;
      try {
        qm = residual_plus(qm, p);
      } catch (const ZeroResidual&) {
        if (rejection <= kZeroTv * carry) return;
        throw;
      }
      carry = rejection;
    }
    scatter(h, carry, qm, next);
  }

  // A rejection at this position: one oracle call, the replacement token
  // drawn from `residual`, and the next position starts a new round.
  void scatter(std::size_t h, double rejection, const Dist& residual,
               Level& next) {
    rejections_ += rejection;
    for (std::size_t x = 0; x < vocab_; ++x) {
      if (residual[x] != 0.0) next.root[h * vocab_ + x] += rejection * residual[x];
    }
  }

  PairView pair_;
  const Algorithm& algorithm_;
  std::size_t vocab_;
  std::vector<Token> history_;
  CompensatedSum rejections_;
};

}  // namespace

EnumerationResult enumerate_algorithm(PairView pair, const Algorithm& algorithm) {
  if (const auto* a = std::get_if<BatchAlgorithm>(&algorithm); a && a->batch == 0) {
    throw InvalidPolicy("batch size must be at least 1");
  }
  if (const auto* g = std::get_if<GenericAlgorithm>(&algorithm);
      g && (!g->policy.acceptance || !g->policy.residual)) {
    throw InvalidPolicy("policy must define acceptance and residual");
  }
  return Enumerator(pair, algorithm).run();
}

std::vector<double> enumerate_output_distribution(PairView pair,
                                                  const Algorithm& algorithm) {
  return enumerate_algorithm(pair, algorithm).joint;
}

double enumerate_expected_rejections(PairView pair, const Algorithm& algorithm) {
  return enumerate_algorithm(pair, algorithm).expected_rejections;
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("l1_distance of tables with " +
                         std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " entries");
  }
  CompensatedSum total;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total.value();
}

}  // namespace speclab
