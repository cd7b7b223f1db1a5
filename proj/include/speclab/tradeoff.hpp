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

#include <span>
#include <vector>

#include "speclab/decoding.hpp"
#include "speclab/dist.hpp"

namespace speclab {

// Raised when sum (1 - b) p is zero, so the rejection branch never runs.
class DegenerateRejection : public Error {
 public:
  using Error::Error;
};

// Entrywise membership tolerance for optimal residuals.
inline constexpr double kMembershipTolerance = 1e-9;

/// Acceptance probabilities b(x) for one decoding position.
struct AcceptanceFn {
  std::vector<double> b;

  std::size_t size() const { return b.size(); }
  double operator[](std::size_t i) const { return b[i]; }
};

/// b(x) = min{1, q(x)/p(x)}.
AcceptanceFn speculative_acceptance_fn(const Dist& p, const Dist& q);

/// b(x) = min{1, (q(x) + eps)/p(x)}, 1 where p(x) = 0.
AcceptanceFn epsilon_acceptance(const Dist& p, const Dist& q, double eps);

/// sum_x (1 - b(x)) p(x).
double rejection_probability(const AcceptanceFn& b, const Dist& p);

/// Smallest TV to q reachable by any residual given b:
/// 1/2 sum |q - b p| - 1/2 sum (1 - b) p.
double loss_tv_star(const AcceptanceFn& b, const Dist& p, const Dist& q);

struct ResidualCharacterization {
  std::vector<double> a;              // (q - b p) / sum (1 - b) p
  std::vector<Token> a_plus;          // a >= 0
  std::vector<Token> a_minus;         // a < 0
  Dist canonical;                     // [a]_+ normalized
};

/// Throws DegenerateRejection when the rejection probability is below kZeroTv.
ResidualCharacterization optimal_residual(const AcceptanceFn& b, const Dist& p,
                                          const Dist& q);

/// True iff P vanishes on a_minus and 0 <= P <= a on a_plus.
bool is_optimal_residual(const Dist& residual, const AcceptanceFn& b,
                         const Dist& p, const Dist& q);

/// Single-token output law b p + P sum (1 - b) p.
Dist induced_output_distribution(const AcceptanceFn& b, const Dist& residual,
                                 const Dist& p, const Dist& q);

struct ParetoPoint {
  double epsilon = 0.0;
  double reject_prob = 0.0;
  double loss_star = 0.0;
};

std::vector<ParetoPoint> pareto_front(const Dist& p, const Dist& q,
                                      std::span<const double> eps_grid);

/// Over-acceptance with the canonical optimal residual.
Policy decoding_opt_policy(double eps);

/// Over-acceptance with the target itself as residual.
Policy decoding_uno_policy(double eps);

}  // namespace speclab
