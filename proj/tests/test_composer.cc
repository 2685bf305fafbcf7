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

#include "doctest.h"
#include "pkgc/composer.h"
#include "pkgc/corpus.h"
#include "pkgc/vocab.h"
#include "test_util.h"

using namespace pkgc;

namespace {

std::vector<SegmentRole> roles_of(const ComposedSequence &s) {
  std::vector<SegmentRole> r;
  for (const auto &seg : s.segments) r.push_back(seg.role);
  return r;
}

TokenIds ids(std::initializer_list<TokenId> l) { return TokenIds(l); }

}  // namespace

TEST_CASE("vocab prepends specials and round-trips") {
  const Vocab v({"a", "b", "[SEP]"});
  CHECK(v.size() == kNumSpecial + 2);
  CHECK(v.id("[CLS]") == kCls);
  CHECK(v.id("a") == kNumSpecial);
  CHECK(v.id("zzz") == kUnk);
  CHECK(v.decode(v.encode({"a", "b", "a"})) == Tokens{"a", "b", "a"});
  CHECK(v.decode({kBos, kNumSpecial, kEos}) == Tokens{"a"});
}

TEST_CASE("vocab build orders by frequency then alphabetically and caps size") {
  DialogueCase c;
  c.id = "1";
  c.context = {{"b", "a"}};
  c.knowledge = {{"b", "c"}};
  c.response = {"b", "a"};
  MemoryRepository repo;
  repo.entries["u"] = {{"d"}};
  const Vocab v = Vocab::build({c}, repo, kNumSpecial + 2);
  CHECK(v.size() == kNumSpecial + 2);
  CHECK(v.word(kNumSpecial) == "b");
  CHECK(v.word(kNumSpecial + 1) == "a");
}

TEST_CASE("PRIOR_ZP layout is [CLS] C [SEP] P [SEP]") {
  const std::vector<TokenIds> ctx = {ids({10, 11})};
  const TokenIds p = ids({12});
  const auto s = compose(DistKind::kPriorZp, {ctx, {}, p, {}});
  CHECK(s.tokens == ids({kCls, 10, 11, kSep, 12, kSep}));
  CHECK(roles_of(s) ==
        std::vector<SegmentRole>{SegmentRole::kContext, SegmentRole::kMemory});
  CHECK_FALSE(s.truncation_applied);
}

TEST_CASE("segment order per kind") {
  const std::vector<TokenIds> ctx = {ids({10})};
  const TokenIds r = ids({11}), p = ids({12}), k = ids({13});
  using R = SegmentRole;
  const ComposeInputs all{ctx, r, p, k};
  CHECK(roles_of(compose(DistKind::kPriorZk, all)) ==
        std::vector<R>{R::kContext, R::kMemory, R::kKnowledge});
  CHECK(roles_of(compose(DistKind::kPostZp, all)) ==
        std::vector<R>{R::kContext, R::kResponse, R::kMemory});
  CHECK(roles_of(compose(DistKind::kPostZk, all)) ==
        std::vector<R>{R::kContext, R::kResponse, R::kMemory, R::kKnowledge});
  CHECK(roles_of(compose(DistKind::kAuxZp, all)) ==
        std::vector<R>{R::kContext, R::kResponse, R::kKnowledge, R::kMemory});
  CHECK(compose(DistKind::kPostZk, all).tokens ==
        ids({kCls, 10, kSep, 11, kSep, 12, kSep, 13, kSep}));
  ComposerOptions indep;
  indep.independent_latents = true;
  CHECK(roles_of(compose(DistKind::kPriorZk, all, indep)) ==
        std::vector<R>{R::kContext, R::kKnowledge});
}

TEST_CASE("missing segment names kind and segment") {
  const std::vector<TokenIds> ctx = {ids({10})};
  try {
    compose(DistKind::kPostZk, {ctx, {}, ids({12}), ids({13})});
    FAIL("expected CompositionError");
  } catch (const CompositionError &e) {
    const std::string w = e.what();
    CHECK(w.find("POST_ZK") != std::string::npos);
    CHECK(w.find("response") != std::string::npos);
  }
  CHECK_THROWS_AS(compose(DistKind::kPriorZp, {ctx, {}, {}, {}}),
                  CompositionError);
}

TEST_CASE("removing R from POST layouts yields PRIOR layouts") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<TokenIds> ctx;
    for (std::size_t u = 0, n = 1 + rng.below(3); u < n; ++u) {
      TokenIds x;
      for (std::size_t i = 0, m = 1 + rng.below(4); i < m; ++i)
        x.push_back(static_cast<TokenId>(10 + rng.below(20)));
      ctx.push_back(x);
    }
    const TokenIds r = {30, 31}, p = {40}, k = {50, 51};
    CHECK(compose(DistKind::kPostZp, {ctx, r, p, {}}).tokens.size() ==
          compose(DistKind::kPriorZp, {ctx, {}, p, {}}).tokens.size() + 3);
    auto post = compose(DistKind::kPostZk, {ctx, r, p, k});
    auto prior = compose(DistKind::kPriorZk, {ctx, {}, p, k});
    const auto &resp = post.segments[1];
    TokenIds stripped = post.tokens;
    stripped.erase(stripped.begin() + resp.begin,
                   stripped.begin() + resp.end + 1);
    CHECK(stripped == prior.tokens);
  }
}

TEST_CASE("truncation drops the oldest context tokens first") {
  ComposerOptions o;
  o.max_seq_len = 12;
  o.context_floor = 2;
  const std::vector<TokenIds> ctx = {ids({10, 11, 12}), ids({13, 14, 15})};
  const TokenIds p = ids({20, 21});
  const auto s = compose(DistKind::kPriorZp, {ctx, {}, p, {}}, o);
  CHECK(s.tokens.size() == 12);
  CHECK_FALSE(s.truncation_applied);
  o.max_seq_len = 10;
  const auto t = compose(DistKind::kPriorZp, {ctx, {}, p, {}}, o);
  CHECK(t.truncation_applied);
  CHECK(t.tokens == ids({kCls, 12, kSep, 13, 14, 15, kSep, 20, 21, kSep}));
}

TEST_CASE("truncation length accounting over random lengths") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    ComposerOptions o;
    o.context_floor = 1 + rng.below(8);
    std::vector<TokenIds> ctx;
    TokenIds flat;
    std::vector<std::size_t> owner;
    for (std::size_t u = 0, n = 1 + rng.below(4); u < n; ++u) {
      TokenIds x;
      for (std::size_t i = 0, m = 1 + rng.below(12); i < m; ++i) {
        x.push_back(static_cast<TokenId>(100 + flat.size()));
        flat.push_back(x.back());
        owner.push_back(u);
      }
      ctx.push_back(x);
    }
    TokenIds r(1 + rng.below(5), 60), p(1 + rng.below(5), 61),
        k(1 + rng.below(5), 62);
    const std::size_t fixed = 1 + (r.size() + 1) + (p.size() + 1) + (k.size() + 1);
    // Only sizes where the context floor alone can make it fit.
    const std::size_t floor_len =
        fixed + std::min(o.context_floor, flat.size()) + 1 + 3;
    o.max_seq_len = floor_len + rng.below(30);

    // Largest context suffix that fits, never below the floor.
    auto len_with = [&](std::size_t keep) {
      std::size_t utts = 0;
      for (std::size_t i = flat.size() - keep; i < flat.size(); ++i)
        if (i == flat.size() - keep || owner[i] != owner[i - 1]) ++utts;
      return fixed + keep + utts;
    };
    std::size_t keep = flat.size();
    while (keep > o.context_floor && len_with(keep) > o.max_seq_len) --keep;

    const auto s = compose(DistKind::kPostZk, {ctx, r, p, k}, o);
    CHECK(s.tokens.size() <= o.max_seq_len);
    CHECK(s.segment_length(SegmentRole::kContext) - (len_with(keep) - fixed - keep - 1) ==
          keep);
    CHECK(s.segment_length(SegmentRole::kResponse) == r.size());
    CHECK(s.segment_length(SegmentRole::kMemory) == p.size());
    CHECK(s.segment_length(SegmentRole::kKnowledge) == k.size());
    CHECK(s.truncation_applied == (keep < flat.size()));
    // Kept context is a suffix of the original.
    TokenIds got;
    for (std::size_t i = s.segments[0].begin; i < s.segments[0].end; ++i)
      if (s.tokens[i] != kSep) got.push_back(s.tokens[i]);
    CHECK(got == TokenIds(flat.end() - keep, flat.end()));
    CHECK(s.tokens[0] == kCls);
  }
}
