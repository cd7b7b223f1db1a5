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

#include "speclab/model_io.hpp"

#include <string>

namespace speclab {

namespace {

using nlohmann::json;

const json& require(const json& object, const char* key) {
  if (!object.is_object() || !object.contains(key)) {
    throw ModelFormatError(std::string("model descriptor missing \"") + key +
                           "\"");
  }
  return object.at(key);
}

std::size_t require_positive(const json& object, const char* key) {
  const json& value = require(object, key);
  if (!value.is_number_integer() || value.get<std::int64_t>() <= 0) {
    throw ModelFormatError(std::string("\"") + key +
                           "\" must be a positive integer");
  }
  return value.get<std::size_t>();
}

Dist parse_row(const json& row, std::size_t vocab, bool normalize,
               const std::string& where) {
  if (!row.is_array() || row.size() != vocab) {
    throw ModelFormatError(where + ": expected an array of " +
                           std::to_string(vocab) + " numbers");
  }
  std::vector<double> values;
  values.reserve(vocab);
  for (const json& v : row) {
    if (!v.is_number()) throw ModelFormatError(where + ": non-numeric entry");
    values.push_back(v.get<double>());
  }
  try {
    return normalize ? Dist::from_weights(std::move(values))
                     : Dist(std::move(values));
  } catch (const InvalidDistribution& e) {
    throw ModelFormatError(where + ": " + e.what());
  }
}

}  // namespace

MarkovModel markov_model_from_json(const json& descriptor) {
  const std::size_t vocab = require_positive(descriptor, "vocab_size");
  const std::size_t horizon = require_positive(descriptor, "horizon");

  if (descriptor.contains("generator")) {
    const json& kind = descriptor.at("generator");
    if (kind != "random") {
      throw ModelFormatError("unknown generator " + kind.dump());
    }
    const json& seed = require(descriptor, "seed");
    if (!seed.is_number_unsigned() &&
        !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
      throw ModelFormatError("\"seed\" must be an unsigned integer");
    }
    return random_markov_model(seed.get<std::uint64_t>(), vocab, horizon);
  }

  const bool normalize = descriptor.value("normalize", false);
  Dist prompt = parse_row(require(descriptor, "prompt"), vocab, normalize,
                          "prompt");
  const json& steps = require(descriptor, "steps");
  if (!steps.is_array() || steps.size() != horizon) {
    throw ModelFormatError("\"steps\" must hold " + std::to_string(horizon) +
                           " transition tables");
  }
  std::vector<CondDist> tables;
  tables.reserve(horizon);
  for (std::size_t n = 0; n < horizon; ++n) {
    const json& table = steps[n];
    if (!table.is_array() || table.size() != vocab) {
      throw ModelFormatError("step " + std::to_string(n + 1) + " must hold " +
                             std::to_string(vocab) + " rows");
    }
    std::vector<Dist> rows;
    rows.reserve(vocab);
    for (std::size_t s = 0; s < vocab; ++s) {
      rows.push_back(parse_row(table[s], vocab, normalize,
                               "step " + std::to_string(n + 1) + " row " +
                                   std::to_string(s)));
    }
    tables.emplace_back(std::move(rows));
  }
  return MarkovModel(std::move(prompt), std::move(tables));
}

json markov_model_to_json(const MarkovModel& chain) {
  json steps = json::array();
  for (std::size_t n = 1; n <= chain.horizon(); ++n) {
    json table = json::array();
    for (const Dist& row : chain.step(n).rows()) {
      table.push_back(std::vector<double>(row.begin(), row.end()));
    }
    steps.push_back(std::move(table));
  }
  return json{{"vocab_size", chain.vocab_size()},
              {"horizon", chain.horizon()},
              {"prompt", std::vector<double>(chain.prompt().begin(),
                                             chain.prompt().end())},
              {"steps", std::move(steps)}};
}

MarkovPair markov_pair_from_json(const json& descriptor) {
  try {
    return MarkovPair(markov_model_from_json(require(descriptor, "draft")),
                      markov_model_from_json(require(descriptor, "target")));
  } catch (const InvalidModel& e) {
    throw ModelFormatError(e.what());
  }
}

}  // namespace speclab
