// Copyright 2026 The pkgc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Versioned JSON checkpoints: model config, vocabulary, config hash and the
// full training state (parameters, Adam moments, counters, RNG state).
// Doubles are written with round-trip precision, so save/load is exact.

#ifndef PKGC_CHECKPOINT_H_
#define PKGC_CHECKPOINT_H_

#include <string>

#include "json.hpp"
#include "pkgc/errors.h"
#include "pkgc/training.h"

namespace pkgc {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointError : ConfigError {
  explicit CheckpointError(const std::string &w) : ConfigError(w) {}
};

struct Checkpoint {
  ModelConfig config;
  Vocab vocab;
  std::string config_hash;
  TrainState state;
};

nlohmann::ordered_json checkpoint_to_json(const Model &model,
                                          const TrainState &state);
// Throws CheckpointError on a bad container, version or hash.
Checkpoint checkpoint_from_json(const nlohmann::ordered_json &j);

// Writes via a temporary file and rename.
void save_checkpoint(const std::string &path, const Model &model,
                     const TrainState &state);
Checkpoint read_checkpoint(const std::string &path);

// Loads the state for an existing model; rejects checkpoints whose config
// hash or vocabulary differ from the model's.
TrainState load_state(const std::string &path, const Model &model);

nlohmann::ordered_json model_config_to_json(const ModelConfig &c);
ModelConfig model_config_from_json(const nlohmann::ordered_json &j);

}  // namespace pkgc

#endif  // PKGC_CHECKPOINT_H_
