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

#ifndef PKGC_VOCAB_H_
#define PKGC_VOCAB_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pkgc/corpus.h"

namespace pkgc {

using TokenId = std::int32_t;
using TokenIds = std::vector<TokenId>;

// Reserved ids, always present at the front of every vocabulary.
enum SpecialToken : TokenId {
  kPad = 0,
  kUnk = 1,
  kCls = 2,
  kSep = 3,
  kBos = 4,
  kEos = 5,
  kNumSpecial = 6,
};

class Vocab {
 public:
  Vocab();
  explicit Vocab(std::vector<std::string> words);

  // Most frequent words first, ties alphabetical; at most max_size entries
  // including the special tokens.
  static Vocab build(const std::vector<DialogueCase> &cases,
                     const MemoryRepository &repo, std::size_t max_size);

  std::size_t size() const { return words_.size(); }
  TokenId id(const std::string &word) const;  // kUnk when absent
  const std::string &word(TokenId id) const;
  TokenIds encode(const Tokens &tokens) const;
  Tokens decode(const TokenIds &ids, bool skip_special = true) const;
  const std::vector<std::string> &words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
};

// A case with every token sequence mapped to ids.
struct EncodedCase {
  std::vector<TokenIds> context;
  std::vector<TokenIds> knowledge;
  TokenIds response;
  std::vector<TokenIds> memory;
};

EncodedCase encode_case(const Vocab &vocab, const DialogueCase &c,
                        const MemorySet &mem);

}  // namespace pkgc

#endif  // PKGC_VOCAB_H_
