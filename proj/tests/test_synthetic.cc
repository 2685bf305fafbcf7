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

#include <cmath>

#include "doctest.h"
#include "pkgc/synthetic.h"
#include "test_util.h"

using namespace pkgc;

namespace {

// Frequency-count estimate of p(zk | zp) from the truth records.
std::vector<std::vector<double>> empirical_table(const SyntheticSpec &spec,
                                                 const SyntheticData &d) {
  std::vector<std::vector<double>> t(
      spec.num_memory, std::vector<double>(spec.num_knowledge, 0.0));
  for (const auto &r : d.truth) t[r.zp][r.zk] += 1.0;
  for (auto &row : t) {
    double n = 0.0;
    for (double x : row) n += x;
    if (n > 0)
      for (double &x : row) x /= n;
  }
  return t;
}

double total_variation(const std::vector<double> &a,
                       const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

}  // namespace

TEST_CASE("planted table rows") {
  SyntheticSpec spec;
  spec.num_memory = 6;
  spec.num_knowledge = 4;
  spec.dependency_strength = 0.9;
  const auto t = planted_table(spec);
  for (std::size_t zp = 0; zp < 6; ++zp) {
    double sum = 0.0;
    for (std::size_t zk = 0; zk < 4; ++zk) {
      sum += t[zp][zk];
      CHECK(t[zp][zk] == doctest::Approx(zk == zp % 4 ? 0.925 : 0.025));
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("full dependency: the marker oracle recovers every latent") {
  SyntheticSpec spec;
  spec.num_users = 30;
  spec.dependency_strength = 1.0;
  spec.seed = 4;
  const auto d = generate_synthetic(spec);
  REQUIRE(d.truth.size() == d.cases.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < d.cases.size(); ++i) {
    const auto mem = retrieve_memory(d.repo, d.cases[i].user_key);
    const auto m = marker_oracle(d.cases[i], mem);
    CHECK(d.truth[i].id == d.cases[i].id);
    CHECK(d.truth[i].zk == d.truth[i].zp % spec.num_knowledge);
    if (m.zp == d.truth[i].zp && m.zk == d.truth[i].zk) ++hits;
  }
  CHECK(hits == d.cases.size());
}

TEST_CASE("zero dependency: knowledge index is uniform") {
  SyntheticSpec spec;
  spec.num_memory = 5;
  spec.num_knowledge = 4;
  spec.num_users = 5000;  // uniform rows have the widest sampling spread
  spec.dependency_strength = 0.0;
  spec.seed = 9;
  const auto d = generate_synthetic(spec);
  const auto emp = empirical_table(spec, d);
  for (const auto &row : planted_table(spec))
    for (double x : row) CHECK(x == doctest::Approx(0.25));
  for (std::size_t zp = 0; zp < 5; ++zp)
    CHECK(total_variation(emp[zp], planted_table(spec)[zp]) < 0.02);
}

TEST_CASE("empirical conditionals match the planted table") {
  SyntheticSpec spec;
  spec.num_memory = 5;
  spec.num_knowledge = 4;
  spec.num_users = 1250;  // 10,000 cases
  spec.dependency_strength = 0.9;
  spec.seed = 1;
  const auto d = generate_synthetic(spec);
  REQUIRE(d.cases.size() == 10000);
  const auto emp = empirical_table(spec, d);
  const auto want = planted_table(spec);
  for (std::size_t zp = 0; zp < 5; ++zp)
    CHECK(total_variation(emp[zp], want[zp]) < 0.02);
}

TEST_CASE("same seed gives byte-identical output") {
  SyntheticSpec spec;
  spec.num_users = 20;
  spec.distractor_rate = 0.3;
  spec.seed = 77;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  CHECK(format_corpus(a.cases) == format_corpus(b.cases));
  CHECK(format_memory(a.repo) == format_memory(b.repo));
  CHECK(format_truth(a.truth) == format_truth(b.truth));
  spec.seed = 78;
  CHECK(format_corpus(generate_synthetic(spec).cases) !=
        format_corpus(a.cases));
}

TEST_CASE("shape invariants") {
  SyntheticSpec spec;
  spec.num_users = 25;
  spec.num_memory = 6;
  spec.num_knowledge = 5;
  spec.distractor_rate = 0.5;
  const auto d = generate_synthetic(spec);
  CHECK(d.repo.num_users() == 25);
  for (const auto &[user, frags] : d.repo.entries) CHECK(frags.size() >= 5);
  CHECK(d.cases.size() == 25 * spec.cases_per_user);
  for (const auto &c : d.cases) {
    CHECK_NOTHROW(validate_case(c));
    CHECK(c.knowledge.size() == 5);
    CHECK(d.repo.contains(c.user_key));
  }
}

TEST_CASE("inconsistent specs list every problem") {
  SyntheticSpec spec;
  spec.num_users = 0;
  spec.cases_per_user = 0;
  spec.dependency_strength = 1.5;
  CHECK(spec.problems().size() == 3);
  try {
    generate_synthetic(spec);
    FAIL("expected ConfigError");
  } catch (const ConfigError &e) {
    const std::string w = e.what();
    CHECK(w.find("num_users") != std::string::npos);
    CHECK(w.find("cases_per_user") != std::string::npos);
    CHECK(w.find("dependency_strength") != std::string::npos);
  }
  spec = SyntheticSpec{};
  spec.vocab_size = 10;
  CHECK_FALSE(spec.problems().empty());
}
