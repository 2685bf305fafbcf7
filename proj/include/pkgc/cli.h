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

// Command-line front end.
//
//   pkgc gen-data  --spec FILE --out DIR [--seed N] [--force]
//   pkgc label     --corpus F --memory F --out F [--force]
//   pkgc warmup    --config F [--resume CKPT] [--force]
//   pkgc train     --config F [--resume CKPT] [--force]
//   pkgc eval      --config F [--resume CKPT] [--m-sweep] [--force]
//   pkgc infer     --config F [--resume CKPT] [--case ID | --user KEY
//                  --context TEXT... --knowledge TEXT...]
//   pkgc selfcheck [--seed N]
//
// Exit codes: 0 ok, 1 other failure, 2 config error, 3 data error,
// 4 numeric error.

#ifndef PKGC_CLI_H_
#define PKGC_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace pkgc {

// args excludes the program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

// "{step}" in a checkpoint path becomes the global step.
std::string checkpoint_path_for(const std::string &pattern,
                                unsigned long long step);

}  // namespace pkgc

#endif  // PKGC_CLI_H_
