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

#include "speclab/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace speclab {

namespace {

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) {
    throw LengthMismatch("sizes " + std::to_string(a) + " and " +
                         std::to_string(b) + " differ");
  }
}

void require_eps(double eps) {
  if (!(eps >= 0.0)) throw InvalidPolicy("eps must be >= 0");
}

}  // namespace

AcceptanceFn speculative_acceptance_fn(const Dist& p, const Dist& q) {
  return epsilon_acceptance(p, q, 0.0);
}

AcceptanceFn epsilon_acceptance(const Dist& p, const Dist& q, double eps) {
  require_same_size(p.size(), q.size());
  require_eps(eps);
  AcceptanceFn fn{std::vector<double>(p.size(), 1.0)};
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] > 0.0) fn.b[x] = std::min(1.0, (q[x] + eps) / p[x]);
  }
  return fn;
}

double rejection_probability(const AcceptanceFn& b, const Dist& p) {
  require_same_size(b.size(), p.size());
  CompensatedSum total;
  for (std::size_t x = 0; x < p.size(); ++x) total += (1.0 - b[x]) * p[x];
  return std::max(0.0, total.value());
}

double loss_tv_star(const AcceptanceFn& b, const Dist& p, const Dist& q) {
  require_same_size(b.size(), p.size());
  require_same_size(p.size(), q.size());
  // 1/2 sum |q - b p| - 1/2 sum (1 - b) p rewritten as sum [b p - q]_+,
  // which uses sum (q - b p) = sum (1 - b) p and cannot go negative.
  CompensatedSum total;
  for (std::size_t x = 0; x < p.size(); ++x) {
    total += std::max(0.0, b[x] * p[x] - q[x]);
  }
  return total.value();
}

ResidualCharacterization optimal_residual(const AcceptanceFn& b, const Dist& p,
                                          const Dist& q) {
  require_same_size(p.size(), q.size());
  const double reject = rejection_probability(b, p);
  if (reject < kZeroTv) {
    throw DegenerateRejection("rejection probability is zero; residual unused");
  }
  ResidualCharacterization out;
  out.a.resize(p.size());
  std::vector<double> positive(p.size(), 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    out.a[x] = (q[x] - b[x] * p[x]) / reject;
    if (out.a[x] >= 0.0) {
      out.a_plus.push_back(static_cast<Token>(x));
      positive[x] = out.a[x];
    } else {
      out.a_minus.push_back(static_cast<Token>(x));
    }
  }
  out.canonical = Dist::from_weights(std::move(positive));
  return out;
}

bool is_optimal_residual(const Dist& residual, const AcceptanceFn& b,
                         const Dist& p, const Dist& q) {
  require_same_size(residual.size(), p.size());
  const ResidualCharacterization rc = optimal_residual(b, p, q);
  for (Token x : rc.a_minus) {
    if (residual[x] > kMembershipTolerance) return false;
  }
  for (Token x : rc.a_plus) {
    if (residual[x] > rc.a[x] + kMembershipTolerance) return false;
  }
  return true;
}

Dist induced_output_distribution(const AcceptanceFn& b, const Dist& residual,
                                 const Dist& p, const Dist& q) {
  require_same_size(b.size(), p.size());
  require_same_size(residual.size(), p.size());
  require_same_size(q.size(), p.size());
  const double reject = rejection_probability(b, p);
  std::vector<double> out(p.size());
  for (std::size_t x = 0; x < p.size(); ++x) {
    out[x] = b[x] * p[x] + residual[x] * reject;
  }
  return Dist(std::move(out));
}

std::vector<ParetoPoint> pareto_front(const Dist& p, const Dist& q,
                                      std::span<const double> eps_grid) {
  std::vector<ParetoPoint> front;
  front.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    const AcceptanceFn b = epsilon_acceptance(p, q, eps);
    front.push_back({eps, rejection_probability(b, p), loss_tv_star(b, p, q)});
  }
  return front;
}

Policy decoding_opt_policy(double eps) {
  require_eps(eps);
  return Policy{
      [eps](const StepContext& ctx, Token candidate) {
        const double p = ctx.draft[candidate];
        if (p <= 0.0) return 1.0;
        return std::min(1.0, (ctx.target[candidate] + eps) / p);
      },
      [eps](const StepContext& ctx) {
        const AcceptanceFn b = epsilon_acceptance(ctx.draft, ctx.target, eps);
        if (rejection_probability(b, ctx.draft) < kZeroTv) return ctx.target;
        return optimal_residual(b, ctx.draft, ctx.target).canonical;
      }};
}

Policy decoding_uno_policy(double eps) {
  require_eps(eps);
  return Policy{
      [eps](const StepContext& ctx, Token candidate) {
        const double p = ctx.draft[candidate];
        if (p <= 0.0) return 1.0;
        return std::min(1.0, (ctx.target[candidate] + eps) / p);
      },
      [](const StepContext& ctx) { return ctx.target; }};
}

}  // namespace speclab
