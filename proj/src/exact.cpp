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

#include "speclab/exact.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace speclab {

namespace {

double effective_tv(const Dist& q, const Dist& p) {
  const double tv = tv_distance(q, p);
  return tv < kZeroTv ? 0.0 : tv;
}

// Probability that every root-position draft is rejected, and its split
// over the token that replaces them.
struct RootRejection {
  double probability = 0.0;
  std::vector<double> mass;
};

RootRejection batch_root(const Dist& q, const Dist& p, std::size_t batch) {
  BatchIterates it = batch_iterates(q, p, batch);
  RootRejection root{it.product, std::vector<double>(q.size(), 0.0)};
  if (it.product > 0.0) {
    const Dist& last = it.targets.back();
    for (std::size_t x = 0; x < q.size(); ++x) root.mass[x] = it.product * last[x];
  }
  return root;
}

// As the batch grows, prod_m r_m q^{M+1} converges to q restricted to the
// tokens the draft never emits.
RootRejection limit_root(const Dist& q, const Dist& p) {
  RootRejection root{0.0, std::vector<double>(q.size(), 0.0)};
  CompensatedSum total;
  for (std::size_t x = 0; x < q.size(); ++x) {
    if (p[x] == 0.0) {
      root.mass[x] = q[x];
      total += q[x];
    }
  }
  root.probability = total.value();
  return root;
}

using Levels = std::vector<std::vector<double>>;

template <class RootFn>
BatchRejections markov_recursion(const MarkovPair& pair, RootFn&& root_of,
                                 Levels* levels) {
  const std::size_t vocab = pair.vocab_size();
  const std::vector<Dist> marginals = target_marginals(pair.target);
  std::vector<double> f(pair.target.prompt().begin(),
                        pair.target.prompt().end());
  if (levels) levels->assign(1, f);

  CompensatedSum speculative;
  CompensatedSum improvement;
  for (std::size_t n = 1; n <= pair.horizon(); ++n) {
    const Dist& mu = marginals[n - 1];
    std::vector<CompensatedSum> next(vocab);
    for (std::size_t s = 0; s < vocab; ++s) {
      const Dist& q = pair.target.step(n).row(static_cast<Token>(s));
      const Dist& p = pair.draft.step(n).row(static_cast<Token>(s));
      const double tv = effective_tv(q, p);
      const RootRejection root = root_of(q, p);
      speculative += mu[s] * tv;
      improvement += f[s] * (tv - root.probability);
      for (std::size_t x = 0; x < vocab; ++x) {
        const double h = std::max(0.0, q[x] - p[x]);
        next[x] += h * mu[s];
        next[x] += -(h - root.mass[x]) * f[s];
      }
    }
    for (std::size_t x = 0; x < vocab; ++x) f[x] = next[x].value();
    if (levels) levels->push_back(f);
  }
  BatchRejections out;
  out.speculative = speculative.value();
  out.improvement = improvement.value();
  out.total = out.speculative - out.improvement;
  return out;
}

template <class RootFn>
BatchRejections full_recursion(const FullPair& pair, RootFn&& root_of,
                               Levels* levels) {
  const std::size_t vocab = pair.vocab_size();
  checked_power(vocab, pair.horizon());
  std::vector<double> f(pair.target.prompt().begin(),
                        pair.target.prompt().end());
  std::vector<double> qmass = f;
  if (levels) levels->assign(1, f);

  CompensatedSum speculative;
  CompensatedSum improvement;
  for (std::size_t n = 1; n <= pair.horizon(); ++n) {
    std::vector<double> next_f(f.size() * vocab, 0.0);
    std::vector<double> next_q(f.size() * vocab, 0.0);
    for (std::size_t h = 0; h < f.size(); ++h) {
      const Dist& q = pair.target.row(n, h);
      const Dist& p = pair.draft.row(n, h);
      const double tv = effective_tv(q, p);
      const RootRejection root = root_of(q, p);
      speculative += qmass[h] * tv;
      improvement += f[h] * (tv - root.probability);
      for (std::size_t x = 0; x < vocab; ++x) {
        const double hx = std::max(0.0, q[x] - p[x]);
        next_f[h * vocab + x] = hx * qmass[h] - (hx - root.mass[x]) * f[h];
        next_q[h * vocab + x] = qmass[h] * q[x];
      }
    }
    f = std::move(next_f);
    qmass = std::move(next_q);
    if (levels) levels->push_back(f);
  }
  BatchRejections out;
  out.speculative = speculative.value();
  out.improvement = improvement.value();
  out.total = out.speculative - out.improvement;
  return out;
}

void require_batch(std::size_t batch) {
  if (batch == 0) throw InvalidArgument("batch size must be at least 1");
}

}  // namespace

double expected_rejections_sd(const MarkovPair& pair) {
  const std::vector<Dist> marginals = target_marginals(pair.target);
  CompensatedSum total;
  for (std::size_t n = 1; n <= pair.horizon(); ++n) {
    for (std::size_t s = 0; s < pair.vocab_size(); ++s) {
      const Token token = static_cast<Token>(s);
      total += marginals[n - 1][s] * effective_tv(pair.target.step(n).row(token),
                                                  pair.draft.step(n).row(token));
    }
  }
  return total.value();
}

double expected_rejections_sd(const FullPair& pair) {
  const std::size_t vocab = pair.vocab_size();
  checked_power(vocab, pair.horizon());
  std::vector<double> qmass(pair.target.prompt().begin(),
                            pair.target.prompt().end());
  CompensatedSum total;
  for (std::size_t n = 1; n <= pair.horizon(); ++n) {
    std::vector<double> next(qmass.size() * vocab);
    for (std::size_t h = 0; h < qmass.size(); ++h) {
      const Dist& q = pair.target.row(n, h);
      total += qmass[h] * effective_tv(q, pair.draft.row(n, h));
      for (std::size_t x = 0; x < vocab; ++x) next[h * vocab + x] = qmass[h] * q[x];
    }
    qmass = std::move(next);
  }
  return total.value();
}

double acceleration_rate(std::size_t horizon, double expected_rejections) {
  if (!(expected_rejections >= 0.0)) {
    throw InvalidArgument("expected rejections must be >= 0");
  }
  const double t = static_cast<double>(horizon);
  if (expected_rejections == 0.0) return t;
  return std::min(t, t / expected_rejections);
}

BatchIterates batch_iterates(const Dist& target, const Dist& draft,
                             std::size_t batch) {
  require_batch(batch);
  BatchIterates it;
  it.targets.push_back(target);
  it.product = 1.0;
  for (std::size_t m = 0; m < batch; ++m) {
    const Dist& qm = it.targets.back();
    const double r = effective_tv(qm, draft);
    it.rejections.push_back(r);
    if (r == 0.0) {
      it.product = 0.0;
      break;
    }
    it.product *= r;
    it.targets.push_back(residual_plus(qm, draft));
  }
  return it;
}

double single_token_batch_improvement(const Dist& target, const Dist& draft,
                                      std::size_t batch) {
  return effective_tv(target, draft) - batch_iterates(target, draft, batch).product;
}

BatchRejections expected_rejections_batch(const MarkovPair& pair,
                                          std::size_t batch) {
  require_batch(batch);
  return markov_recursion(
      pair, [batch](const Dist& q, const Dist& p) { return batch_root(q, p, batch); },
      nullptr);
}

BatchRejections expected_rejections_batch(const FullPair& pair,
                                          std::size_t batch) {
  require_batch(batch);
  return full_recursion(
      pair, [batch](const Dist& q, const Dist& p) { return batch_root(q, p, batch); },
      nullptr);
}

std::vector<std::vector<double>> batch_pseudo_measure(const FullPair& pair,
                                                      std::size_t batch) {
  require_batch(batch);
  Levels levels;
  full_recursion(
      pair, [batch](const Dist& q, const Dist& p) { return batch_root(q, p, batch); },
      &levels);
  return levels;
}

std::vector<std::vector<double>> batch_pseudo_measure(const MarkovPair& pair,
                                                      std::size_t batch) {
  require_batch(batch);
  Levels levels;
  markov_recursion(
      pair, [batch](const Dist& q, const Dist& p) { return batch_root(q, p, batch); },
      &levels);
  return levels;
}

double batch_improvement_uniform(double ratio, std::size_t batch) {
  if (!(ratio >= 1.0)) throw InvalidArgument("ratio V/V' must be >= 1");
  require_batch(batch);
  const double tv = 1.0 - 1.0 / ratio;
  return tv - std::pow(tv, static_cast<double>(batch));
}

double batch_improvement_bernoulli(double u, double v, std::size_t batch) {
  if (!(0.0 <= v && v <= u && u <= 1.0)) {
    throw InvalidArgument("requires 0 <= v <= u <= 1");
  }
  require_batch(batch);
  return std::abs(u - v) * (1.0 - std::pow(u, static_cast<double>(batch - 1)));
}

double limit_rejections(const MarkovPair& pair) {
  return markov_recursion(pair, limit_root, nullptr).total;
}

double limit_rejections(const FullPair& pair) {
  return full_recursion(pair, limit_root, nullptr).total;
}

}  // namespace speclab
