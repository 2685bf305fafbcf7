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

// Run configuration: a flat key/value file with [sections].
//
//   # comment          ; comment
//   [train]
//   warmup_steps = 500
//
// Unknown sections or keys, malformed values and failed constraints are
// all collected and reported together in one ConfigError. Relative paths
// resolve against the config file's directory.

#ifndef PKGC_CONFIG_H_
#define PKGC_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pkgc/corpus.h"
#include "pkgc/inference.h"
#include "pkgc/synthetic.h"
#include "pkgc/training.h"

namespace pkgc {

struct IniEntry {
  std::string section;
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// Syntax errors are appended to errors; well-formed lines are returned.
std::vector<IniEntry> parse_ini(std::string_view text,
                                std::vector<std::string> &errors);

struct DataPaths {
  std::string corpus;
  std::string memory;
  std::string truth;  // optional
  std::string eval_corpus;
  std::string eval_truth;  // optional
};

struct OutputPaths {
  std::string log;
  std::string report;
  std::string checkpoint;
};

struct RunConfig {
  std::uint64_t seed = 0;
  DataPaths data;
  OutputPaths output;
  bool filter_apply = false;  // drop short fragments and sparse users
  FilterOptions filter;
  ModelConfig model;
  TrainingConfig train;  // full-scale defaults unless overridden
  DecodeConfig decode;
  SelectionConfig select;
  std::vector<std::size_t> recall_k = {1, 2, 5, 10};
  bool eval_generate = true;
  std::size_t eval_max_cases = 0;  // 0: all

  EvalConfig eval_config() const;
};

// Throws ConfigError listing every problem.
RunConfig parse_run_config(std::string_view text,
                           const std::string &base_dir = "");
RunConfig load_run_config(const std::string &path);

// [synthetic] section only.
SyntheticSpec parse_synthetic_spec(std::string_view text);
SyntheticSpec load_synthetic_spec(const std::string &path);

std::string read_text_file(const std::string &path);

}  // namespace pkgc

#endif  // PKGC_CONFIG_H_
