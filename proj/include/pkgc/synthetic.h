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

// Synthetic personalized corpora with planted ground truth.
//
// Every user owns |P| fragments "cueC topicT w w". A case's context
// mentions the cue of its true fragment zp* but not the topic. The true
// knowledge index is drawn from
//
//   p*(zk | zp) = s * [zk == zp mod |K|] + (1 - s) / |K|
//
// and the candidate at zp* mod |K| is the only one carrying topic(zp*).
// Other candidates carry topics of the user's other fragments (or unused
// topics when the user has too few). The response repeats the items of
// K_{zk*} and the topic of P_{zp*}, so the latents are recoverable from
// the response, while the prior can only find K via the memory fragment.
//
// With probability distractor_rate a case's response also carries the
// items of one other candidate and the topic of one other fragment, and
// drops one item of K_{zk*}, making pseudo labels ambiguous.

#ifndef PKGC_SYNTHETIC_H_
#define PKGC_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "pkgc/corpus.h"
#include "pkgc/latent.h"

namespace pkgc {

struct SyntheticSpec {
  std::size_t num_users = 250;
  std::size_t cases_per_user = 8;
  std::size_t num_memory = 8;     // |P|
  std::size_t num_knowledge = 8;  // |K|
  std::size_t vocab_size = 600;   // distinct words across all pools
  double dependency_strength = 0.9;
  double distractor_rate = 0.0;
  std::uint64_t seed = 0;

  // Every violated constraint, one message each.
  std::vector<std::string> problems() const;
};

// Sizes of the word pools carved out of vocab_size.
struct SyntheticPools {
  std::size_t cues = 0;
  std::size_t topics = 0;
  std::size_t fillers = 0;
  std::size_t items = 0;
};

SyntheticPools synthetic_pools(const SyntheticSpec &spec);

struct SyntheticData {
  std::vector<DialogueCase> cases;
  MemoryRepository repo;
  std::vector<TruthRecord> truth;
};

// Throws ConfigError listing every problem when the spec is inconsistent.
// Equal specs give identical output.
SyntheticData generate_synthetic(const SyntheticSpec &spec);

// p*(zk | zp) as a |P| x |K| row-stochastic table.
std::vector<std::vector<double>> planted_table(const SyntheticSpec &spec);

// Reads the markers: zp is the fragment whose cue occurs in the context,
// zk the candidate carrying that fragment's topic (lowest index on ties
// or when absent).
LatentAssignment marker_oracle(const DialogueCase &c, const MemorySet &mem);

}  // namespace pkgc

#endif  // PKGC_SYNTHETIC_H_
