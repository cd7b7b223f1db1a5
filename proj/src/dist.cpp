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

#include "speclab/dist.hpp"

#include <algorithm>
#include <cmath>

namespace speclab {

namespace {

void check_same_length(const Dist& a, const Dist& b, const char* what) {
  if (a.size() != b.size()) {
    throw LengthMismatch(std::string(what) + ": length mismatch (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
}

double checked_sum(const std::vector<double>& values) {
  if (values.empty()) {
    throw InvalidDistribution("distribution must have at least one entry");
  }
  CompensatedSum total;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidDistribution("distribution entries must be finite and >= 0");
    }
    total += v;
  }
  return total.value();
}

}  // namespace

Dist::Dist(std::vector<double> probs) : probs_(std::move(probs)) {
  const double total = checked_sum(probs_);
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw InvalidDistribution("distribution sums to " + std::to_string(total) +
                              ", expected 1");
  }
  if (total != 1.0) {
    for (double& v : probs_) v /= total;
  }
}

Dist Dist::from_weights(std::vector<double> weights) {
  const double total = checked_sum(weights);
  if (!(total > 0.0)) {
    throw InvalidDistribution("weights must have a positive sum");
  }
  for (double& v : weights) v /= total;
  return Dist(std::move(weights));
}

Dist Dist::uniform(std::size_t size) {
  if (size == 0) throw InvalidDistribution("empty vocabulary");
  return Dist(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

Dist Dist::point_mass(std::size_t size, Token token) {
  if (token >= size) throw InvalidDistribution("token outside vocabulary");
  std::vector<double> probs(size, 0.0);
  probs[token] = 1.0;
  return Dist(std::move(probs));
}

double tv_distance(const Dist& a, const Dist& b) {
  check_same_length(a, b, "tv_distance");
  CompensatedSum total;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return std::clamp(0.5 * total.value(), 0.0, 1.0);
}

double positive_part_mass(const Dist& q, const Dist& p) {
  check_same_length(q, p, "positive_part_mass");
  CompensatedSum total;
  for (std::size_t i = 0; i < q.size(); ++i) {
    total += std::max(0.0, q[i] - p[i]);
  }
  return total.value();
}

Dist residual_plus(const Dist& q, const Dist& p) {
  check_same_length(q, p, "residual_plus");
  if (tv_distance(q, p) < kZeroTv) {
    throw ZeroResidual("residual [q - p]_+ undefined: TV(q, p) = 0");
  }
  std::vector<double> weights(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    weights[i] = std::max(0.0, q[i] - p[i]);
  }
  return Dist::from_weights(std::move(weights));
}

RejectionStep rejection_iterate(const Dist& qm, const Dist& p) {
  const double r = tv_distance(qm, p);
  return {residual_plus(qm, p), r};
}

Token sample_token(const Dist& d, double u) {
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] <= 0.0) continue;
    cumulative += d[i];
    last_positive = i;
    if (u < cumulative) return static_cast<Token>(i);
  }
  // u landed in the rounding gap above the final cumulative sum.
  return static_cast<Token>(last_positive);
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

}  // namespace speclab
