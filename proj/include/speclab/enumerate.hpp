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

#include <vector>

#include "speclab/decoding.hpp"
#include "speclab/model.hpp"

namespace speclab {

struct EnumerationResult {
  std::vector<double> joint;  // law of x_{1:T}, indexed by sequence_index
  double expected_rejections = 0.0;
};

/// Exact output law and E[N_rej] of a sampler, obtained by propagating
/// probability mass through every accept/reject branch. No sampling.
///
/// Drafts are expanded lazily, one position at a time, which gives the same
/// law as drafting to the horizon up front. Throws SizeCapExceeded when
/// V^T exceeds kMaxTabulatedSequences.
EnumerationResult enumerate_algorithm(PairView pair, const Algorithm& algorithm);

std::vector<double> enumerate_output_distribution(PairView pair,
                                                  const Algorithm& algorithm);

double enumerate_expected_rejections(PairView pair, const Algorithm& algorithm);

/// Sum of |a_i - b_i|.
double l1_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace speclab
