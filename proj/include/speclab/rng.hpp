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

#include <cstdint>
#include <random>

namespace speclab {

std::uint64_t splitmix64(std::uint64_t x);

/// Seeded uniform stream. split(i) derives the i-th child stream from the
/// seed alone (not from the current position), so child streams are
/// independent of how much the parent has been consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  std::uint64_t next_u64() { return engine_(); }

  Rng split(std::uint64_t stream) const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace speclab
