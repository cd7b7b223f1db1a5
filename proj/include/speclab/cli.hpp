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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "speclab/decoding.hpp"
#include "speclab/dist.hpp"
#include "speclab/montecarlo.hpp"

namespace speclab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

class ConfigError : public Error {
 public:
  using Error::Error;
};

// An output that breaks an identity the analysis guarantees.
class NumericalGuard : public Error {
 public:
  using Error::Error;
};

enum class Format { kCsv, kJson };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  Format format = Format::kCsv;
  std::filesystem::path base_dir;  // resolves relative "model" file paths
};

/// Applies overrides to the config so the echoed copy reflects what ran.
nlohmann::json effective_config(nlohmann::json config, const Overrides& overrides);

AnyPair pair_from_config(const nlohmann::json& config,
                         const std::filesystem::path& base_dir);
Algorithm algorithm_from_config(const nlohmann::json& config);

std::string cmd_exact(const nlohmann::json& config, const Overrides& overrides);
std::string cmd_simulate(const nlohmann::json& config, const Overrides& overrides);
std::string cmd_batch_scan(const nlohmann::json& config,
                           const Overrides& overrides);
std::string cmd_pareto(const nlohmann::json& config, const Overrides& overrides);

/// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace speclab::cli
