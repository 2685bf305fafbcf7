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

// Dialogue cases, the user-keyed memory repository, their JSONL formats,
// repository filtering and pseudo-label tagging.

#ifndef PKGC_CORPUS_H_
#define PKGC_CORPUS_H_

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pkgc {

using Tokens = std::vector<std::string>;

struct TokenizerOptions {
  bool lowercase = true;
  bool strip_punctuation = true;
};

// Lowercases, strips ASCII punctuation and splits on whitespace.
Tokens tokenize(std::string_view text, const TokenizerOptions &opts = {});

std::string join_tokens(const Tokens &tokens);

struct DialogueCase {
  std::string id;
  std::string user_key;
  std::vector<Tokens> context;    // one entry per utterance
  std::vector<Tokens> knowledge;  // candidate set
  Tokens response;

  std::size_t context_length() const;
};

// Throws DataError if the case violates its shape invariants.
void validate_case(const DialogueCase &c);

// Fragments for one user, in repository order.
struct MemorySet {
  std::vector<Tokens> fragments;
  std::size_t size() const { return fragments.size(); }
};

struct MemoryRepository {
  std::map<std::string, std::vector<Tokens>> entries;

  bool contains(const std::string &user) const {
    return entries.count(user) != 0;
  }
  std::size_t num_users() const { return entries.size(); }
  bool operator==(const MemoryRepository &) const = default;
};

struct PseudoLabels {
  std::size_t k_bar = 0;
  std::size_t p_bar = 0;
  bool operator==(const PseudoLabels &) const = default;
};

// Ground-truth latent indices for synthetic cases.
struct TruthRecord {
  std::string id;
  std::size_t zp = 0;
  std::size_t zk = 0;
};

// Stable 64-bit digest used for user keys (FNV-1a), rendered as 16 hex
// digits.
std::string hash_user_key(std::string_view account_name);
inline constexpr std::string_view kUserKeyHashName = "fnv1a64";

// JSONL readers. Throw ParseError naming the line (1-based) and, for
// missing fields, the field. An empty corpus file is a DataError.
std::vector<DialogueCase> load_corpus(const std::string &path,
                                      const TokenizerOptions &opts = {});
std::vector<DialogueCase> parse_corpus(std::string_view text,
                                       const TokenizerOptions &opts = {});
MemoryRepository load_memory(const std::string &path,
                             const TokenizerOptions &opts = {});
MemoryRepository parse_memory(std::string_view text,
                              const TokenizerOptions &opts = {});
std::vector<TruthRecord> load_truth(const std::string &path);

// Canonical writers: fixed key order, tokens re-joined by single spaces.
std::string format_corpus(const std::vector<DialogueCase> &cases);
std::string format_memory(const MemoryRepository &repo);
std::string format_truth(const std::vector<TruthRecord> &truth);
void write_corpus(const std::string &path,
                  const std::vector<DialogueCase> &cases);
void write_memory(const std::string &path, const MemoryRepository &repo);
void write_truth(const std::string &path,
                 const std::vector<TruthRecord> &truth);

struct FilterOptions {
  std::size_t min_fragments = 5;
  std::size_t min_len = 4;
  std::size_t max_len = 128;
};

// Drops fragments outside [min_len, max_len], then users left with fewer
// than min_fragments fragments.
MemoryRepository filter_repository(const MemoryRepository &repo,
                                   const FilterOptions &opts = {});

// Throws MissingUserError for unknown keys.
MemorySet retrieve_memory(const MemoryRepository &repo,
                          const std::string &user_key);

using Similarity = std::function<double(const Tokens &, const Tokens &)>;

// Argmax of sim(candidate, response) over knowledge and memory, lowest
// index on ties.
PseudoLabels pseudo_labels(const DialogueCase &c, const MemorySet &mem,
                           const Similarity &sim);
PseudoLabels pseudo_labels(const DialogueCase &c, const MemorySet &mem);

}  // namespace pkgc

#endif  // PKGC_CORPUS_H_
