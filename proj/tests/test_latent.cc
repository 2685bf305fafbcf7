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
#include "pkgc/latent.h"
#include "pkgc/oracle.h"
#include "test_util.h"

using namespace pkgc;

TEST_CASE("identical memory fragments give a uniform prior") {
  TinyInstance inst = make_tiny_instance(7);
  EncodedCase &e = inst.c.enc;
  e.memory.assign(3, e.memory.front());
  const auto in = latent_inputs(e);
  const auto ev = prior_zp(inst.model.latents, inst.params.theta, in);
  REQUIRE(ev.dist.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(ev.dist[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  e.memory.resize(1);
  const auto one = prior_zp(inst.model.latents, inst.params.theta,
                            latent_inputs(e));
  CHECK(one.dist[0] == 1.0);
}

TEST_CASE("full zk tables agree with per-row evaluation") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TinyInstanceOptions o;
    o.share_pair_params = seed % 2 == 0;
    const TinyInstance inst = make_tiny_instance(seed, o);
    const auto in = latent_inputs(inst.c.enc);
    const auto &m = inst.model.latents;
    const auto pt = prior_zk_table(m, inst.params.theta, in);
    const auto qt = post_zk_table(m, inst.params.phi, in);
    REQUIRE(pt.size() == in.memory.size());
    for (std::size_t zp = 0; zp < pt.size(); ++zp) {
      const auto p = prior_zk(m, inst.params.theta, in, zp).dist;
      const auto q = post_zk(m, inst.params.phi, in, zp).dist;
      REQUIRE(p.size() == in.knowledge.size());
      for (std::size_t k = 0; k < p.size(); ++k) {
        CHECK(pt[zp][k] == p[k]);
        CHECK(qt[zp][k] == q[k]);
      }
      // An explicit single-fragment segment is the same as the index.
      const auto by_seg =
          prior_zk(m, inst.params.theta, in, in.memory[zp]).dist;
      for (std::size_t k = 0; k < p.size(); ++k) CHECK(by_seg[k] == p[k]);
    }
  }
}

TEST_CASE("posterior and auxiliary models need a response") {
  TinyInstance inst = make_tiny_instance(3);
  inst.c.enc.response.clear();
  const auto in = latent_inputs(inst.c.enc);
  CHECK_NOTHROW(prior_zp(inst.model.latents, inst.params.theta, in));
  CHECK_THROWS_AS(post_zp(inst.model.latents, inst.params.phi, in),
                  ArgumentError);
  CHECK_THROWS_AS(aux_zp(inst.model.latents, inst.params.psi, in, 0),
                  ArgumentError);
}

TEST_CASE("independent latents drop the memory from the knowledge prior") {
  TinyInstanceOptions o;
  o.independent_latents = true;
  o.min_memory = 2;
  const TinyInstance inst = make_tiny_instance(11, o);
  const auto in = latent_inputs(inst.c.enc);
  const auto t = prior_zk_table(inst.model.latents, inst.params.theta, in);
  for (std::size_t zp = 1; zp < t.size(); ++zp)
    for (std::size_t k = 0; k < t[0].size(); ++k) CHECK(t[zp][k] == t[0][k]);
}

TEST_CASE("sampling frequencies, point masses and seeds") {
  const auto u = CategoricalDistribution::uniform(4);
  Rng rng(5);
  std::vector<double> counts(4, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[sample(u, rng)] += 1.0;
  for (double c : counts) CHECK(std::abs(c / n - 0.25) < 0.01);

  const CategoricalDistribution point({0.0, 0.0, 1.0});
  Rng r2(1);
  for (int i = 0; i < 100; ++i) CHECK(sample(point, r2) == 2);

  Rng a(42), b(42);
  const CategoricalDistribution d({0.1, 0.2, 0.3, 0.4});
  for (int i = 0; i < 100; ++i) CHECK(sample(d, a) == sample(d, b));
  CHECK(sample_with_uniform(d, 0.0) == 0);
  CHECK(sample_with_uniform(d, 0.1) == 1);
  CHECK(sample_with_uniform(d, 0.99) == 3);
}

TEST_CASE("distribution validation, argmax and top") {
  CHECK_THROWS(CategoricalDistribution({0.5, 0.6}));
  CHECK_THROWS(CategoricalDistribution({-0.1, 1.1}));
  const CategoricalDistribution d({0.3, 0.1, 0.3, 0.3});
  CHECK(d.argmax() == 0);
  CHECK(d.top(3) == std::vector<std::size_t>{0, 2, 3});
}

TEST_CASE("kl fixtures and non-negativity") {
  const CategoricalDistribution p({1.0, 0.0}), q({0.5, 0.5});
  CHECK(kl(p, q) == doctest::Approx(std::log(2.0)));
  CHECK(kl(q, q) == 0.0);
  CHECK_THROWS_AS(kl(q, p), NumericError);
  Rng rng(8);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(8);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform() * 6 - 3;
      b[i] = rng.uniform() * 6 - 3;
    }
    const auto pa = CategoricalDistribution::from_logits(a);
    const auto pb = CategoricalDistribution::from_logits(b);
    CHECK(kl(pa, pb) >= -1e-15);
    double direct = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      direct += pa[i] * std::log(pa[i] / pb[i]);
    CHECK(kl(pa, pb) == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("temper") {
  const CategoricalDistribution d({0.8, 0.2});
  const auto same = temper(d, 1.0);
  CHECK(same[0] == doctest::Approx(0.8));
  const auto flat = temper(d, 1e6);
  CHECK(flat[0] == doctest::Approx(0.5).epsilon(1e-5));
  const auto sharp = temper(d, 0.5);
  CHECK(sharp[0] == doctest::Approx(0.9412).epsilon(1e-4));
  CHECK(sharp[1] == doctest::Approx(0.0588).epsilon(1e-3));
  CHECK_THROWS_AS(temper(d, 0.0), ArgumentError);
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(2 + rng.below(6));
    for (double &v : x) v = rng.uniform() * 4;
    const auto p = CategoricalDistribution::from_logits(x);
    const double temp = 0.1 + rng.uniform() * 5;
    CHECK(temper(p, temp).argmax() == p.argmax());
  }
}

TEST_CASE("latent tables factorize into proper joints") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TinyInstance inst = make_tiny_instance(100 + seed);
    const auto t = latent_tables(inst.model, inst.params, inst.c);
    const auto in = latent_inputs(inst.c.enc);
    const auto pz = prior_zp(inst.model.latents, inst.params.theta, in).dist;
    const auto qz = post_zp(inst.model.latents, inst.params.phi, in).dist;
    double jq = 0.0, jp = 0.0;
    for (std::size_t zp = 0; zp < t.q_zp.size(); ++zp) {
      CHECK(t.p_zp[zp] == pz[zp]);
      CHECK(t.q_zp[zp] == qz[zp]);
      for (std::size_t zk = 0; zk < t.q_zk[zp].size(); ++zk) {
        jq += t.q_zp[zp] * t.q_zk[zp][zk];
        jp += t.p_zp[zp] * t.p_zk[zp][zk];
        CHECK(t.loglik[zp][zk] <= 0.0);
      }
    }
    CHECK(jq == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(jp == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("concat_fragments follows the given order") {
  const std::vector<TokenIds> mem = {{6, 7}, {8}, {9, 10}};
  const std::vector<std::size_t> order = {2, 0};
  CHECK(concat_fragments(mem, order) == TokenIds{9, 10, 6, 7});
}
