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
#include <vector>

#include "speclab/dist.hpp"
#include "speclab/model.hpp"

namespace speclab {

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Expected rejections of speculative decoding: the sum over steps of the
/// target-weighted TV(p_n, q_n). O(T V^2) for chains.
double expected_rejections_sd(const MarkovPair& pair);
/// Same quantity by exhaustive history sum.
double expected_rejections_sd(const FullPair& pair);

/// T / E[N_rej], capped at the horizon (so E = 0 reports T).
double acceleration_rate(std::size_t horizon, double expected_rejections);

/// Residual iterates q^1 = q, q^{m+1} = [q^m - p]_+ with r_m = TV(q^m, p).
///
/// Iteration stops early once some r_m is zero; `product` is then exactly 0
/// and `targets` ends at that q^m.
struct BatchIterates {
  std::vector<Dist> targets;       // q^1 .. q^{M+1} when product > 0
  std::vector<double> rejections;  // r_1 .. r_M
  double product = 0.0;            // prod_m r_m
};

BatchIterates batch_iterates(const Dist& target, const Dist& draft,
                             std::size_t batch);

/// TV(q, p) - prod_m TV(q^m, p) for a single position.
double single_token_batch_improvement(const Dist& target, const Dist& draft,
                                      std::size_t batch);

struct BatchRejections {
  double speculative = 0.0;  // expected_rejections_sd
  double improvement = 0.0;  // batch improvement, >= 0
  double total = 0.0;        // speculative - improvement
};

/// Batch expected rejections with the pseudo-measure marginalized onto the
/// last token of each prefix.
BatchRejections expected_rejections_batch(const MarkovPair& pair,
                                          std::size_t batch);
/// Batch expected rejections with the pseudo-measure over full histories.
BatchRejections expected_rejections_batch(const FullPair& pair,
                                          std::size_t batch);

/// Pseudo-measure f over histories: level n (0..T) holds V^{n+1} masses
/// indexed by sequence_index({x_0..x_n}); f at level n is the mass of
/// prefixes whose n-th token came from a rejection (level 0 is the prompt).
std::vector<std::vector<double>> batch_pseudo_measure(const FullPair& pair,
                                                      std::size_t batch);

/// Last-token marginal of the pseudo-measure: level n holds V masses.
std::vector<std::vector<double>> batch_pseudo_measure(const MarkovPair& pair,
                                                      std::size_t batch);

/// Closed-form improvement for q = Unif(V'), p = Unif(V), r = V / V'.
double batch_improvement_uniform(double ratio, std::size_t batch);

/// Closed-form improvement for q = Ber(v), p = Ber(u), u >= v.
double batch_improvement_bernoulli(double u, double v, std::size_t batch);

/// Limit of expected_rejections_batch as the batch size grows without bound.
double limit_rejections(const MarkovPair& pair);
double limit_rejections(const FullPair& pair);

}  // namespace speclab
