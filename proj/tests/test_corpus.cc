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

#include <algorithm>
#include <map>

#include "doctest.h"
#include "pkgc/corpus.h"
#include "pkgc/errors.h"
#include "test_util.h"

using namespace pkgc;
using pkgc::testing::random_tokens;

namespace {

std::string random_corpus_text(Rng &rng, std::size_t n) {
  std::vector<DialogueCase> cases;
  for (std::size_t i = 0; i < n; ++i) {
    DialogueCase c;
    c.id = "c" + std::to_string(i);
    c.user_key = hash_user_key("user" + std::to_string(rng.below(5)));
    for (std::size_t u = 0, nu = 1 + rng.below(3); u < nu; ++u)
      c.context.push_back(random_tokens(rng, 1, 6));
    for (std::size_t k = 0, nk = 1 + rng.below(4); k < nk; ++k)
      c.knowledge.push_back(random_tokens(rng, 1, 6));
    c.response = random_tokens(rng, 1, 6);
    cases.push_back(c);
  }
  return format_corpus(cases);
}

// Unigram F1 by explicit multiset counting.
double count_f1(const Tokens &a, const Tokens &b) {
  std::map<std::string, int> ca, cb;
  for (const auto &t : a) ++ca[t];
  for (const auto &t : b) ++cb[t];
  double overlap = 0;
  for (const auto &[w, n] : ca)
    if (cb.count(w)) overlap += std::min(n, cb[w]);
  if (overlap == 0) return 0.0;
  const double p = overlap / a.size(), r = overlap / b.size();
  return 2 * p * r / (p + r);
}

}  // namespace

TEST_CASE("tokenize lowercases and strips punctuation") {
  CHECK(tokenize("Hello, World!  a-b") == Tokens{"hello", "world", "ab"});
  CHECK(tokenize("   ").empty());
}

TEST_CASE("two-line corpus keeps ids and order") {
  const std::string text =
      R"({"id":"a","user":"u1","context":["hi there"],"knowledge":["k one","k two"],"response":"hello"})"
      "\n"
      R"({"id":"b","user":"u2","context":["x","y z"],"knowledge":["k"],"response":"r s"})"
      "\n";
  const auto cases = parse_corpus(text);
  REQUIRE(cases.size() == 2);
  CHECK(cases[0].id == "a");
  CHECK(cases[1].id == "b");
  CHECK(cases[1].context.size() == 2);
  CHECK(cases[0].knowledge[1] == Tokens{"k", "two"});
}

TEST_CASE("missing response names the field and line") {
  const std::string text =
      R"({"id":"a","user":"u1","context":["hi"],"knowledge":["k"]})" "\n";
  try {
    parse_corpus(text);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 1);
    CHECK(std::string(e.what()).find("response") != std::string::npos);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("empty corpus is a data error") {
  CHECK_THROWS_AS(parse_corpus(""), DataError);
}

TEST_CASE("format(parse(f)) is byte-identical to the canonical form") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::string canon = random_corpus_text(rng, 1 + rng.below(10));
    CHECK(format_corpus(parse_corpus(canon)) == canon);
  }
  // Non-canonical spacing and case collapse to the canonical form.
  const std::string messy =
      R"({"id":"a","user":"u","context":["  Hi   THERE "],"knowledge":["K!"],"response":"Yes."})"
      "\n";
  const std::string canon = format_corpus(parse_corpus(messy));
  CHECK(format_corpus(parse_corpus(canon)) == canon);
  CHECK(canon.find("hi there") != std::string::npos);
}

TEST_CASE("file round trip through write and load") {
  const std::string dir = pkgc::testing::temp_dir("corpus-rt");
  Rng rng(3);
  const auto cases = parse_corpus(random_corpus_text(rng, 5));
  write_corpus(dir + "/c.jsonl", cases);
  CHECK(format_corpus(load_corpus(dir + "/c.jsonl")) == format_corpus(cases));

  MemoryRepository repo;
  repo.entries["u"] = {{"a", "b"}, {"c"}};
  write_memory(dir + "/m.jsonl", repo);
  CHECK(load_memory(dir + "/m.jsonl") == repo);

  const std::vector<TruthRecord> truth = {{"a", 1, 2}, {"b", 0, 3}};
  write_truth(dir + "/t.jsonl", truth);
  const auto back = load_truth(dir + "/t.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[1].zk == 3);
}

TEST_CASE("filter boundary cases") {
  MemoryRepository repo;
  const Tokens ok = {"a", "b", "c", "d"};
  const Tokens short_frag = {"a"};
  repo.entries["five"] = {ok, ok, ok, ok, ok};
  repo.entries["six-two-bad"] = {ok, ok, ok, ok, short_frag, short_frag};
  const auto out = filter_repository(repo, FilterOptions{5, 4, 128});
  CHECK(out.contains("five"));
  CHECK_FALSE(out.contains("six-two-bad"));
}

TEST_CASE("filter equals a per-user brute-force filter and is idempotent") {
  Rng rng(11);
  MemoryRepository repo;
  for (int u = 0; u < 100; ++u) {
    auto &frags = repo.entries["u" + std::to_string(u)];
    for (std::size_t i = 0, n = rng.below(9); i < n; ++i)
      frags.push_back(random_tokens(rng, 1, 8));
  }
  const FilterOptions opts{5, 3, 6};
  const auto out = filter_repository(repo, opts);
  for (const auto &[user, frags] : repo.entries) {
    std::vector<Tokens> kept;
    std::copy_if(frags.begin(), frags.end(), std::back_inserter(kept),
                 [&](const Tokens &f) { return f.size() >= 3 && f.size() <= 6; });
    if (kept.size() >= 5) {
      REQUIRE(out.contains(user));
      CHECK(out.entries.at(user) == kept);
    } else {
      CHECK_FALSE(out.contains(user));
    }
  }
  CHECK(filter_repository(out, opts) == out);
}

TEST_CASE("retrieve memory") {
  MemoryRepository repo;
  for (int i = 0; i < 7; ++i)
    repo.entries["k"].push_back({"f" + std::to_string(i)});
  CHECK(retrieve_memory(repo, "k").size() == 7);
  CHECK(retrieve_memory(repo, "k").fragments ==
        retrieve_memory(repo, "k").fragments);
  CHECK_THROWS_AS(retrieve_memory(repo, "nobody"), MissingUserError);
}

TEST_CASE("pseudo labels: exact copy dominates, zero overlap ties to 0") {
  DialogueCase c;
  c.id = "x";
  c.context = {{"hi"}};
  c.response = {"the", "red", "fox"};
  c.knowledge = {{"x", "y"}, {"the", "red", "fox"}};
  const MemorySet mem{{{"q"}, {"red"}}};
  const auto l = pseudo_labels(c, mem);
  CHECK(l.k_bar == 1);
  CHECK(l.p_bar == 1);
  c.knowledge = {{"a"}, {"b"}, {"c"}};
  CHECK(pseudo_labels(c, MemorySet{{{"z"}}}).k_bar == 0);
}

TEST_CASE("pseudo labels equal a brute-force similarity loop") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    DialogueCase c;
    c.id = "r";
    c.context = {random_tokens(rng, 1, 4, 6)};
    c.response = random_tokens(rng, 1, 5, 6);
    for (int k = 0; k < 5; ++k) c.knowledge.push_back(random_tokens(rng, 1, 5, 6));
    MemorySet mem;
    for (int p = 0; p < 6; ++p) mem.fragments.push_back(random_tokens(rng, 1, 5, 6));
    auto brute = [&](const std::vector<Tokens> &cands) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < cands.size(); ++i)
        if (count_f1(cands[i], c.response) > count_f1(cands[best], c.response))
          best = i;
      return best;
    };
    const auto l = pseudo_labels(c, mem);
    CHECK(l.k_bar == brute(c.knowledge));
    CHECK(l.p_bar == brute(mem.fragments));
  }
}

TEST_CASE("pseudo labels are permutation-equivariant") {
  DialogueCase c;
  c.id = "p";
  c.context = {{"a"}};
  c.response = {"a", "b", "c"};
  c.knowledge = {{"z"}, {"a", "b"}, {"c"}};
  const MemorySet mem{{{"a"}}};
  CHECK(pseudo_labels(c, mem).k_bar == 1);
  std::swap(c.knowledge[0], c.knowledge[1]);
  CHECK(pseudo_labels(c, mem).k_bar == 0);
}

TEST_CASE("user keys are stable 16-hex-digit digests") {
  const auto k = hash_user_key("alice");
  CHECK(k.size() == 16);
  CHECK(k == hash_user_key("alice"));
  CHECK(k != hash_user_key("bob"));
  CHECK(hash_user_key("") == "cbf29ce484222325");
}
