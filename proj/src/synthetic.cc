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

#include "pkgc/synthetic.h"

#include <algorithm>
#include <cstdio>

#include "pkgc/errors.h"
#include "pkgc/rng.h"

namespace pkgc {

namespace {

constexpr std::size_t kItemsPerCandidate = 3;
constexpr std::size_t kFragmentFillers = 2;

std::string word(const char *prefix, std::size_t i) {
  return prefix + std::to_string(i);
}

void shuffle(Tokens &t, Rng &rng) {
  for (std::size_t i = t.size(); i > 1; --i)
    std::swap(t[i - 1], t[rng.below(i)]);
}

// k distinct values from [0, n), in draw order.
std::vector<std::size_t> distinct(std::size_t n, std::size_t k, Rng &rng) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i)
    std::swap(pool[i], pool[i + rng.below(n - i)]);
  pool.resize(k);
  return pool;
}

}  // namespace

SyntheticPools synthetic_pools(const SyntheticSpec &spec) {
  SyntheticPools p;
  const std::size_t eighth = spec.vocab_size / 8;
  p.cues = std::max(spec.num_memory, eighth);
  p.topics = std::max({spec.num_memory, spec.num_knowledge, eighth});
  p.fillers = std::max<std::size_t>(4, eighth);
  const std::size_t used = p.cues + p.topics + p.fillers;
  p.items = spec.vocab_size > used ? spec.vocab_size - used : 0;
  return p;
}

std::vector<std::string> SyntheticSpec::problems() const {
  std::vector<std::string> p;
  if (num_users == 0) p.push_back("synthetic.num_users must be >= 1");
  if (cases_per_user == 0) p.push_back("synthetic.cases_per_user must be >= 1");
  if (num_memory < 5)
    p.push_back("synthetic.num_memory must be >= 5 to survive filtering");
  if (num_knowledge < 2) p.push_back("synthetic.num_knowledge must be >= 2");
  if (!(dependency_strength >= 0.0 && dependency_strength <= 1.0))
    p.push_back("synthetic.dependency_strength must be in [0, 1]");
  if (!(distractor_rate >= 0.0 && distractor_rate <= 1.0))
    p.push_back("synthetic.distractor_rate must be in [0, 1]");
  if (vocab_size < num_memory * num_knowledge)
    p.push_back("synthetic.vocab_size must be >= num_memory * num_knowledge");
  if (num_memory >= 5 && num_knowledge >= 2 &&
      synthetic_pools(*this).items < kItemsPerCandidate * num_knowledge)
    p.push_back("synthetic.vocab_size leaves fewer than " +
                std::to_string(kItemsPerCandidate * num_knowledge) +
                " item words");
  return p;
}

std::vector<std::vector<double>> planted_table(const SyntheticSpec &spec) {
  const std::size_t P = spec.num_memory, K = spec.num_knowledge;
  const double s = spec.dependency_strength;
  std::vector<std::vector<double>> t(P, std::vector<double>(K, (1.0 - s) / K));
  for (std::size_t zp = 0; zp < P; ++zp) t[zp][zp % K] += s;
  return t;
}

SyntheticData generate_synthetic(const SyntheticSpec &spec) {
  if (const auto p = spec.problems(); !p.empty()) {
    std::string msg = "invalid synthetic spec:";
    for (const auto &s : p) msg += "\n  " + s;
    throw ConfigError(msg);
  }
  const SyntheticPools pools = synthetic_pools(spec);
  const std::size_t P = spec.num_memory, K = spec.num_knowledge;
  Rng rng(spec.seed);
  auto filler = [&]() { return word("w", rng.below(pools.fillers)); };

  SyntheticData out;
  std::size_t case_no = 0;
  for (std::size_t u = 0; u < spec.num_users; ++u) {
    const std::string user = hash_user_key("user-" + std::to_string(u));
    const auto cues = distinct(pools.cues, P, rng);
    // Topics for the fragments first, then spare ones for extra candidates.
    const auto topics = distinct(pools.topics, std::max(P, K), rng);

    std::vector<Tokens> fragments(P);
    for (std::size_t i = 0; i < P; ++i) {
      Tokens f{word("cue", cues[i]), word("topic", topics[i])};
      for (std::size_t j = 0; j < kFragmentFillers; ++j) f.push_back(filler());
      shuffle(f, rng);
      fragments[i] = std::move(f);
    }
    out.repo.entries[user] = fragments;

    for (std::size_t c = 0; c < spec.cases_per_user; ++c, ++case_no) {
      char id[32];
      std::snprintf(id, sizeof id, "case-%06zu", case_no);
      DialogueCase dc;
      dc.id = id;
      dc.user_key = user;

      const std::size_t zp = rng.below(P);
      const std::size_t zk =
          rng.uniform() < spec.dependency_strength ? zp % K : rng.below(K);

      // Candidate zp % K links to fragment zp; the rest link to the other
      // fragments (then to spare topics) in random order.
      std::vector<std::size_t> others;
      for (std::size_t i = 0; i < std::max(P, K); ++i)
        if (i != zp) others.push_back(i);
      for (std::size_t i = others.size(); i > 1; --i)
        std::swap(others[i - 1], others[rng.below(i)]);
      std::vector<std::size_t> link(K);
      for (std::size_t j = 0, o = 0; j < K; ++j)
        link[j] = j == zp % K ? zp : others[o++];

      const auto items = distinct(pools.items, kItemsPerCandidate * K, rng);
      for (std::size_t j = 0; j < K; ++j) {
        Tokens k{word("topic", topics[link[j]])};
        for (std::size_t i = 0; i < kItemsPerCandidate; ++i)
          k.push_back(word("item", items[j * kItemsPerCandidate + i]));
        shuffle(k, rng);
        dc.knowledge.push_back(std::move(k));
      }

      Tokens first{filler(), word("cue", cues[zp])};
      shuffle(first, rng);
      dc.context = {first, Tokens{filler(), filler()}};

      Tokens r{word("topic", topics[zp])};
      const bool distract = rng.uniform() < spec.distractor_rate;
      const std::size_t keep = distract ? kItemsPerCandidate - 1
                                        : kItemsPerCandidate;
      for (std::size_t i = 0; i < keep; ++i)
        r.push_back(word("item", items[zk * kItemsPerCandidate + i]));
      if (distract) {
        const std::size_t j = (zk + 1 + rng.below(K - 1)) % K;
        for (std::size_t i = 0; i < kItemsPerCandidate; ++i)
          r.push_back(word("item", items[j * kItemsPerCandidate + i]));
        const std::size_t f = (zp + 1 + rng.below(P - 1)) % P;
        r.push_back(word("topic", topics[f]));
      } else {
        r.push_back(filler());
      }
      shuffle(r, rng);
      dc.response = std::move(r);

      out.cases.push_back(std::move(dc));
      out.truth.push_back(TruthRecord{id, zp, zk});
    }
  }
  return out;
}

LatentAssignment marker_oracle(const DialogueCase &c, const MemorySet &mem) {
  auto find_prefixed = [](const Tokens &t, std::string_view prefix) {
    for (const auto &w : t)
      if (w.rfind(prefix, 0) == 0) return w;
    return std::string();
  };
  LatentAssignment a;
  bool found = false;
  for (std::size_t i = 0; i < mem.size() && !found; ++i) {
    const std::string cue = find_prefixed(mem.fragments[i], "cue");
    if (cue.empty()) continue;
    for (const auto &utt : c.context)
      if (std::find(utt.begin(), utt.end(), cue) != utt.end()) {
        a.zp = i;
        found = true;
        break;
      }
  }
  if (mem.size() == 0) return a;
  const std::string topic = find_prefixed(mem.fragments[a.zp], "topic");
  for (std::size_t j = 0; j < c.knowledge.size(); ++j)
    if (!topic.empty() && std::find(c.knowledge[j].begin(),
                                    c.knowledge[j].end(),
                                    topic) != c.knowledge[j].end()) {
      a.zk = j;
      break;
    }
  return a;
}

}  // namespace pkgc
