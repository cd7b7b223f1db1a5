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
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace speclab {

using Token = std::uint32_t;

// Tolerance on |sum - 1| accepted by the Dist constructor.
inline constexpr double kNormalizationTolerance = 1e-9;
// TV values below this are treated as exactly zero.
inline constexpr double kZeroTv = 1e-12;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDistribution : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

// Raised when [q - p]_+ is requested for q == p.
class ZeroResidual : public Error {
 public:
  using Error::Error;
};

/// Probability row over a finite vocabulary.
///
/// Entries are nonnegative and sum to one. The constructor accepts rows whose
/// sum is within kNormalizationTolerance of one and renormalizes them;
/// from_weights() normalizes arbitrary nonnegative weights.
class Dist {
 public:
  Dist() = default;
  explicit Dist(std::vector<double> probs);
  Dist(std::initializer_list<double> probs)
      : Dist(std::vector<double>(probs)) {}

  static Dist from_weights(std::vector<double> weights);
  static Dist uniform(std::size_t size);
  static Dist point_mass(std::size_t size, Token token);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  auto begin() const { return probs_.begin(); }
  auto end() const { return probs_.end(); }

  friend bool operator==(const Dist&, const Dist&) = default;

 private:
  std::vector<double> probs_;
};

/// Half the L1 distance. Symmetric, in [0, 1].
double tv_distance(const Dist& a, const Dist& b);

/// Sum of max{0, q(x) - p(x)}; equals tv_distance(q, p) mathematically.
double positive_part_mass(const Dist& q, const Dist& p);

/// Normalized positive part x -> max{0, q(x) - p(x)} / TV(q, p).
/// Throws ZeroResidual when TV(q, p) < kZeroTv.
Dist residual_plus(const Dist& q, const Dist& p);

struct RejectionStep {
  Dist next;          // q^{m+1}
  double rejection;   // r_m = TV(q^m, p)
};

/// One step of q^{m+1} = [q^m - p]_+ together with r_m.
RejectionStep rejection_iterate(const Dist& qm, const Dist& p);

/// Inverse-CDF draw using a uniform u in [0, 1). Never returns a token with
/// zero probability.
Token sample_token(const Dist& d, double u);

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace speclab
