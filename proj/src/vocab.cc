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

#include "pkgc/vocab.h"

#include <algorithm>
#include <map>

#include "pkgc/errors.h"

namespace pkgc {

namespace {

const std::vector<std::string> &special_words() {
  static const std::vector<std::string> w = {"[PAD]", "[UNK]", "[CLS]",
                                             "[SEP]", "[BOS]", "[EOS]"};
  return w;
}

}  // namespace

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(std::vector<std::string> words) {
  words_ = special_words();
  for (auto &w : words) {
    if (std::find(words_.begin(), words_.begin() + kNumSpecial, w) !=
        words_.begin() + kNumSpecial)
      continue;
    words_.push_back(std::move(w));
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<TokenId>(i)).second)
      throw DataError("duplicate vocabulary entry: " + words_[i]);
  }
}

Vocab Vocab::build(const std::vector<DialogueCase> &cases,
                   const MemoryRepository &repo, std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  auto add = [&](const Tokens &t) {
    for (const auto &w : t) ++counts[w];
  };
  for (const auto &c : cases) {
    for (const auto &u : c.context) add(u);
    for (const auto &k : c.knowledge) add(k);
    add(c.response);
  }
  for (const auto &[user, frags] : repo.entries)
    for (const auto &f : frags) add(f);

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  std::vector<std::string> words;
  const std::size_t room = max_size > kNumSpecial ? max_size - kNumSpecial : 0;
  for (std::size_t i = 0; i < ranked.size() && words.size() < room; ++i)
    words.push_back(ranked[i].first);
  return Vocab(std::move(words));
}

TokenId Vocab::id(const std::string &word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

const std::string &Vocab::word(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size())
    throw ArgumentError("token id out of vocabulary: " + std::to_string(id));
  return words_[id];
}

TokenIds Vocab::encode(const Tokens &tokens) const {
  TokenIds ids;
  ids.reserve(tokens.size());
  for (const auto &t : tokens) ids.push_back(id(t));
  return ids;
}

Tokens Vocab::decode(const TokenIds &ids, bool skip_special) const {
  Tokens out;
  for (TokenId i : ids) {
    if (skip_special && i < kNumSpecial) continue;
    out.push_back(word(i));
  }
  return out;
}

EncodedCase encode_case(const Vocab &vocab, const DialogueCase &c,
                        const MemorySet &mem) {
  EncodedCase e;
  for (const auto &u : c.context) e.context.push_back(vocab.encode(u));
  for (const auto &k : c.knowledge) e.knowledge.push_back(vocab.encode(k));
  e.response = vocab.encode(c.response);
  for (const auto &f : mem.fragments) e.memory.push_back(vocab.encode(f));
  return e;
}

}  // namespace pkgc
