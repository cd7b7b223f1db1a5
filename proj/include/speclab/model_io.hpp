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

#include <json.hpp>

#include "speclab/model.hpp"

namespace speclab {

class ModelFormatError : public Error {
 public:
  using Error::Error;
};

// Model descriptors come in two forms:
//
//   explicit:  {"vocab_size": V, "horizon": T, "prompt": [...],
//               "steps": [ [[row], ...V rows], ...T tables ],
//               "normalize": false}
//   generator: {"generator": "random", "seed": 10, "vocab_size": 7,
//               "horizon": 50}
//
// With "normalize": true, explicit rows are treated as nonnegative weights.
MarkovModel markov_model_from_json(const nlohmann::json& descriptor);
nlohmann::json markov_model_to_json(const MarkovModel& chain);

// {"draft": <descriptor>, "target": <descriptor>}
MarkovPair markov_pair_from_json(const nlohmann::json& descriptor);

}  // namespace speclab
