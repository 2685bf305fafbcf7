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
#include "pkgc/oracle.h"

using namespace pkgc;

namespace {

double flipped_kl(const CategoricalDistribution &p,
                  const CategoricalDistribution &q) {
  return kl(q, p);
}

double half_kl(const CategoricalDistribution &p,
               const CategoricalDistribution &q) {
  return 0.5 * kl(p, q);
}

}  // namespace

TEST_CASE("finite-difference error definition") {
  CHECK(fd_relative_error(1.0, 1.0) == 0.0);
  CHECK(fd_relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(fd_relative_error(1e-6, 0.0) == doctest::Approx(1e-3));
}

TEST_CASE("single-candidate marginal is the generator likelihood") {
  TinyInstanceOptions o;
  o.max_memory = 1;
  o.max_knowledge = 1;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TinyInstance inst = make_tiny_instance(seed, o);
    const auto t = latent_tables(inst.model, inst.params, inst.c);
    CHECK(exact_log_marginal(inst) == doctest::Approx(t.loglik[0][0]));
    CHECK(elbo_from_tables(t).value() ==
          doctest::Approx(t.loglik[0][0]).epsilon(1e-12));
  }
}

TEST_CASE("tiny instances respect their bounds") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const TinyInstance inst = make_tiny_instance(seed);
    CHECK(inst.c.enc.memory.size() >= 1);
    CHECK(inst.c.enc.memory.size() <= 4);
    CHECK(inst.c.enc.knowledge.size() >= 1);
    CHECK(inst.c.enc.knowledge.size() <= 4);
    CHECK(inst.model.vocab.size() <= 20);
  }
}

TEST_CASE("ELBO bound and true-posterior gap") {
  const ElboBoundStats s = elbo_bound_stats(200, 0);
  CHECK(s.instances == 200);
  CHECK(s.min_slack >= -1e-9);
  CHECK(s.max_posterior_gap < 1e-9);
  CHECK(check_elbo_bound().passed);
}

TEST_CASE("mutated KL terms are caught") {
  CHECK_FALSE(check_elbo_bound(200, 0, flipped_kl).passed);
  CHECK_FALSE(check_elbo_bound(200, 0, half_kl).passed);
}

TEST_CASE("gradients, REINFORCE and metric fixtures") {
  const GradCheckStats g = gradient_check_stats(10, 0);
  CHECK(g.max_rel_error < 1e-4);
  CHECK(g.coordinates > 0);
  const ReinforceStats r = reinforce_stats(10, 0);
  CHECK(r.max_abs_error < 1e-9);
  CHECK(r.max_fd_rel_error < 1e-4);
  CHECK(metric_fixture_failures().empty());
}

TEST_CASE("selfcheck passes") {
  const auto results = run_selfcheck(0);
  CHECK(results.size() == 4);
  for (const auto &r : results) {
    INFO(r.name << ": " << r.detail);
    CHECK(r.passed);
  }
}
