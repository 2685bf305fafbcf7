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

#include "pkgc/oracle.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>

#include "pkgc/metrics.h"

namespace pkgc {

namespace {

std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

double log_sum_exp(const std::vector<double> &v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

Tokens random_words(Rng &rng, std::size_t num_words, std::size_t lo,
                    std::size_t hi) {
  const std::size_t n = lo + rng.below(hi - lo + 1);
  Tokens t;
  for (std::size_t i = 0; i < n; ++i)
    t.push_back("w" + std::to_string(rng.below(num_words)));
  return t;
}

std::size_t in_range(Rng &rng, std::size_t lo, std::size_t hi) {
  return lo + rng.below(hi - lo + 1);
}

template <typename Fn>
CheckResult timed(const std::string &name, Fn &&fn) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r = fn();
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            t0)
                  .count();
  return r;
}

Params &group(ParamSet &p, int g) {
  switch (g) {
    case 0: return p.theta;
    case 1: return p.phi;
    case 2: return p.psi;
    default: return p.gen;
  }
}

const Params &group(const ParamSet &p, int g) {
  return group(const_cast<ParamSet &>(p), g);
}

const char *group_name(int g) {
  static const char *names[] = {"theta", "phi", "psi", "gen"};
  return names[g];
}

// Compares grad against central differences of f on up to `per_group`
// random coordinates of each group in mask.
void fd_compare(const std::string &what,
                const std::function<double(const ParamSet &)> &f,
                const ParamSet &at, const ParamSet &grad, unsigned mask,
                std::size_t per_group, Rng &rng, GradCheckStats &stats) {
  for (int g = 0; g < 4; ++g) {
    if (!(mask & (1u << g))) continue;
    ParamSet p = at;
    Params &v = group(p, g);
    const Params &a = group(grad, g);
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i + 1 < idx.size(); ++i)
      std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    idx.resize(std::min(per_group, idx.size()));
    for (std::size_t i : idx) {
      const double x = v[i];
      v[i] = x + kFdStep;
      const double up = f(p);
      v[i] = x - kFdStep;
      const double down = f(p);
      v[i] = x;
      const double numeric = (up - down) / (2.0 * kFdStep);
      const double err = fd_relative_error(a[i], numeric);
      ++stats.coordinates;
      if (err > stats.max_rel_error || std::isnan(err)) {
        stats.max_rel_error = std::isnan(err) ? 1.0 : err;
        stats.worst = what + "/" + group_name(g);
      }
    }
  }
}

// Independent n-gram counter for BLEU cross-checks.
std::map<Tokens, int> ngrams(const Tokens &t, std::size_t n) {
  std::map<Tokens, int> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i)
    ++out[Tokens(t.begin() + i, t.begin() + i + n)];
  return out;
}

double reference_bleu(const std::vector<Tokens> &hyps,
                      const std::vector<Tokens> &refs, std::size_t max_n,
                      bool add_one) {
  double log_p = 0.0;
  double hyp_len = 0.0, ref_len = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    hyp_len += hyps[i].size();
    ref_len += refs[i].size();
  }
  for (std::size_t n = 1; n <= max_n; ++n) {
    double match = 0.0, total = 0.0;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      const auto h = ngrams(hyps[i], n), r = ngrams(refs[i], n);
      for (const auto &[g, c] : h) {
        total += c;
        auto it = r.find(g);
        if (it != r.end()) match += std::min(c, it->second);
      }
    }
    if (add_one && n >= 2) {
      match += 1.0;
      total += 1.0;
    }
    if (match == 0.0) return 0.0;
    log_p += std::log(match / total) / static_cast<double>(max_n);
  }
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return bp * std::exp(log_p);
}

bool is_subsequence(const Tokens &sub, const Tokens &seq) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < seq.size() && j < sub.size(); ++i)
    if (seq[i] == sub[j]) ++j;
  return j == sub.size();
}

// Longest common subsequence by trying every subsequence of a.
std::size_t brute_force_lcs(const Tokens &a, const Tokens &b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (mask & (1u << i)) sub.push_back(a[i]);
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

}  // namespace

TinyInstance make_tiny_instance(std::uint64_t seed,
                                const TinyInstanceOptions &o) {
  Rng rng = Rng::derive(seed, 0x7a11);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < o.num_words; ++i)
    words.push_back("w" + std::to_string(i));

  DialogueCase c;
  c.id = "tiny-" + std::to_string(seed);
  c.user_key = "u";
  const std::size_t turns = in_range(rng, 1, 2);
  for (std::size_t i = 0; i < turns; ++i)
    c.context.push_back(random_words(rng, o.num_words, 1, 3));
  const std::size_t K = in_range(rng, o.min_knowledge, o.max_knowledge);
  for (std::size_t i = 0; i < K; ++i)
    c.knowledge.push_back(random_words(rng, o.num_words, 1, 3));
  c.response = random_words(rng, o.num_words, 1, 4);
  MemoryRepository repo;
  const std::size_t P = in_range(rng, o.min_memory, o.max_memory);
  for (std::size_t i = 0; i < P; ++i)
    repo.entries["u"].push_back(random_words(rng, o.num_words, 1, 3));

  ModelConfig cfg;
  cfg.dim = o.dim;
  cfg.hidden = o.hidden;
  cfg.share_pair_params = o.share_pair_params;
  cfg.independent_latents = o.independent_latents;
  TinyInstance inst;
  inst.model = make_model(cfg, Vocab(words));
  inst.params = zero_like(inst.model);
  for (int g = 0; g < 4; ++g)
    init_uniform(group(inst.params, g), rng, o.param_scale);
  inst.c = prepare_cases(inst.model.vocab, {c}, repo).front();
  return inst;
}

double exact_log_marginal(const TinyInstance &inst) {
  const Model &m = inst.model;
  const EncodedCase &e = inst.c.enc;
  const auto in = latent_inputs(e);
  const auto p_zp = prior_zp(m.latents, inst.params.theta, in).dist;
  TokenIds target = e.response;
  target.push_back(kEos);
  std::vector<double> terms;
  for (std::size_t zp = 0; zp < e.memory.size(); ++zp) {
    const auto p_zk = prior_zk(m.latents, inst.params.theta, in, zp).dist;
    for (std::size_t zk = 0; zk < e.knowledge.size(); ++zk) {
      const double ll = m.generator->log_likelihood(
          inst.params.gen,
          GenerationCondition{e.context, e.memory[zp], e.knowledge[zk]},
          target);
      terms.push_back(std::log(p_zp[zp]) + std::log(p_zk[zk]) + ll);
    }
  }
  return log_sum_exp(terms);
}

LatentTables true_posterior_tables(const TinyInstance &inst) {
  LatentTables t = latent_tables(inst.model, inst.params, inst.c);
  const std::size_t P = t.p_zp.size();
  const std::size_t K = t.p_zk.front().size();
  std::vector<double> joint;
  for (std::size_t zp = 0; zp < P; ++zp)
    for (std::size_t zk = 0; zk < K; ++zk)
      joint.push_back(std::log(t.p_zp[zp]) + std::log(t.p_zk[zp][zk]) +
                      t.loglik[zp][zk]);
  const double z = log_sum_exp(joint);
  std::vector<double> marg(P, 0.0);
  std::vector<std::vector<double>> rows(P, std::vector<double>(K));
  for (std::size_t zp = 0; zp < P; ++zp) {
    std::vector<double> row(joint.begin() + zp * K,
                            joint.begin() + (zp + 1) * K);
    const double lz = log_sum_exp(row);
    marg[zp] = std::exp(lz - z);
    for (std::size_t zk = 0; zk < K; ++zk)
      rows[zp][zk] = std::exp(row[zk] - lz);
  }
  double s = 0.0;
  for (double x : marg) s += x;
  for (double &x : marg) x /= s;
  t.q_zp = CategoricalDistribution(marg);
  for (std::size_t zp = 0; zp < P; ++zp)
    t.q_zk[zp] = CategoricalDistribution(rows[zp]);
  return t;
}

ElboBoundStats elbo_bound_stats(std::size_t instances, std::uint64_t seed,
                                KlFn kl_fn) {
  ElboBoundStats s;
  s.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instances; ++i) {
    const TinyInstance inst = make_tiny_instance(seed * 100003 + i);
    const double log_marginal = exact_log_marginal(inst);
    const double bound =
        elbo_from_tables(latent_tables(inst.model, inst.params, inst.c), kl_fn)
            .value();
    const double tight =
        elbo_from_tables(true_posterior_tables(inst), kl_fn).value();
    s.min_slack = std::min(s.min_slack, log_marginal - bound);
    s.max_posterior_gap =
        std::max(s.max_posterior_gap, std::abs(log_marginal - tight));
    ++s.instances;
  }
  return s;
}

double fd_relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), kFdFloor});
}

GradCheckStats gradient_check_stats(std::size_t seeds, std::uint64_t seed) {
  GradCheckStats stats;
  constexpr std::size_t kPerGroup = std::numeric_limits<std::size_t>::max();
  constexpr unsigned kTheta = 1, kPhi = 2, kPsi = 4, kGen = 8;
  for (std::size_t s = 0; s < seeds; ++s) {
    TinyInstanceOptions o;
    o.min_memory = 2;
    o.min_knowledge = 2;
    o.share_pair_params = s % 2 == 0;
    const TinyInstance inst = make_tiny_instance(seed * 7919 + s, o);
    const Model &m = inst.model;
    const PreparedCase &c = inst.c;
    Rng rng = Rng::derive(seed, 1000 + s);

    {
      ParamSet g = zero_like(m);
      warmup_objective(m, inst.params, c, true, &g);
      fd_compare("warmup",
                 [&](const ParamSet &p) {
                   const auto t = warmup_objective(m, p, c, true, nullptr);
                   return t.latent_loglik + t.gen_loglik;
                 },
                 inst.params, g, kTheta | kPhi | kPsi | kGen, kPerGroup, rng,
                 stats);
    }
    for (ElboMode mode : {ElboMode::kEnumerate, ElboMode::kSample}) {
      const double u1 = rng.uniform(), u2 = rng.uniform();
      ParamSet g = zero_like(m);
      theta_objective(m, inst.params, c, mode, u1, u2, &g);
      fd_compare(mode == ElboMode::kEnumerate ? "elbo-enumerate"
                                              : "elbo-sample",
                 [&](const ParamSet &p) {
                   return elbo(m, p, c, mode, u1, u2).value();
                 },
                 inst.params, g, kTheta | kGen, kPerGroup, rng, stats);
    }
    {
      const double alpha = 0.5 + 0.25 * static_cast<double>(s % 3);
      const double temp = 0.5 + static_cast<double>(s % 4);
      ParamSet g = zero_like(m);
      distill_objective(m, inst.params, c, alpha, temp, &g);
      fd_compare("distill",
                 [&](const ParamSet &p) {
                   return distill_objective(m, p, c, alpha, temp, nullptr);
                 },
                 inst.params, g, kPhi, kPerGroup, rng, stats);
    }
    {
      const std::size_t zp = rng.below(c.enc.memory.size());
      const std::size_t zk = rng.below(c.enc.knowledge.size());
      ParamSet g = zero_like(m);
      dual_phi_objective(m, inst.params, c, zp, zk, 0.1, &g);
      fd_compare("dual-phi",
                 [&](const ParamSet &p) {
                   return dual_phi_objective(m, p, c, zp, zk, 0.1, nullptr)
                       .surrogate;
                 },
                 inst.params, g, kPhi, kPerGroup, rng, stats);
      ParamSet h = zero_like(m);
      dual_psi_objective(m, inst.params, c, zp, 0.1, &h);
      fd_compare("dual-psi",
                 [&](const ParamSet &p) {
                   return dual_psi_objective(m, p, c, zp, 0.1, nullptr)
                       .surrogate;
                 },
                 inst.params, h, kPsi, kPerGroup, rng, stats);
    }
  }
  return stats;
}

ReinforceStats reinforce_stats(std::size_t instances, std::uint64_t seed) {
  ReinforceStats st;
  for (std::size_t n = 0; n < instances; ++n) {
    TinyInstanceOptions o;
    o.min_memory = o.max_memory = 3;
    o.min_knowledge = o.max_knowledge = 3;
    o.param_scale = 1.0;
    o.share_pair_params = n % 2 == 0;
    const TinyInstance inst = make_tiny_instance(seed * 4099 + n, o);
    const Model &m = inst.model;
    const PreparedCase &c = inst.c;
    const auto in = latent_inputs(c.enc);
    const std::size_t P = 3, K = 3;
    const double baseline = n % 3 == 0 ? 0.0 : 0.25;

    // Primal: E[Re1] with the Zp sampling weights held fixed.
    const auto w = post_zp(m.latents, inst.params.phi, in).dist;
    ParamSet est = zero_like(m), exact = zero_like(m);
    for (std::size_t zp = 0; zp < P; ++zp) {
      const LatentEval q = post_zk(m.latents, inst.params.phi, in, zp);
      std::vector<double> r(K);
      double mean = 0.0;
      for (std::size_t zk = 0; zk < K; ++zk) {
        r[zk] = aux_zp(m.latents, inst.params.psi, in, zk).dist[zp];
        mean += q.dist[zk] * r[zk];
        ParamSet g = zero_like(m);
        dual_phi_objective(m, inst.params, c, zp, zk, baseline, &g);
        for (std::size_t i = 0; i < g.phi.size(); ++i)
          est.phi[i] += w[zp] * q.dist[zk] * g.phi[i];
      }
      std::vector<double> d(K);
      for (std::size_t zk = 0; zk < K; ++zk)
        d[zk] = w[zp] * q.dist[zk] * (r[zk] - mean);
      backprop(m.latents, q, inst.params.phi, d, exact.phi);
    }
    // Dual: E[Re2] under Zp ~ pi_psi(.|K_bar).
    {
      const LatentEval pi =
          aux_zp(m.latents, inst.params.psi, in, c.labels.k_bar);
      std::vector<double> r(P);
      double mean = 0.0;
      for (std::size_t zp = 0; zp < P; ++zp) {
        r[zp] = post_zk(m.latents, inst.params.phi, in, zp)
                    .dist[c.labels.k_bar];
        mean += pi.dist[zp] * r[zp];
        ParamSet g = zero_like(m);
        dual_psi_objective(m, inst.params, c, zp, baseline, &g);
        for (std::size_t i = 0; i < g.psi.size(); ++i)
          est.psi[i] += pi.dist[zp] * g.psi[i];
      }
      std::vector<double> d(P);
      for (std::size_t zp = 0; zp < P; ++zp)
        d[zp] = pi.dist[zp] * (r[zp] - mean);
      backprop(m.latents, pi, inst.params.psi, d, exact.psi);
    }
    for (std::size_t i = 0; i < est.phi.size(); ++i)
      st.max_abs_error =
          std::max(st.max_abs_error, std::abs(est.phi[i] - exact.phi[i]));
    for (std::size_t i = 0; i < est.psi.size(); ++i)
      st.max_abs_error =
          std::max(st.max_abs_error, std::abs(est.psi[i] - exact.psi[i]));

    // The exact gradients themselves against finite differences.
    auto expected_re1 = [&](const ParamSet &p) {
      double v = 0.0;
      for (std::size_t zp = 0; zp < P; ++zp) {
        const auto q = post_zk(m.latents, p.phi, in, zp).dist;
        for (std::size_t zk = 0; zk < K; ++zk)
          v += w[zp] * q[zk] *
               aux_zp(m.latents, p.psi, in, zk).dist[zp];
      }
      return v;
    };
    auto expected_re2 = [&](const ParamSet &p) {
      const auto pi = aux_zp(m.latents, p.psi, in, c.labels.k_bar).dist;
      double v = 0.0;
      for (std::size_t zp = 0; zp < P; ++zp)
        v += pi[zp] *
             post_zk(m.latents, p.phi, in, zp).dist[c.labels.k_bar];
      return v;
    };
    GradCheckStats fd;
    Rng rng = Rng::derive(seed, 2000 + n);
    fd_compare("re1", expected_re1, inst.params, exact, 2u, 24, rng, fd);
    fd_compare("re2", expected_re2, inst.params, exact, 4u, 24, rng, fd);
    st.max_fd_rel_error = std::max(st.max_fd_rel_error, fd.max_rel_error);
  }
  return st;
}

std::vector<std::string> metric_fixture_failures() {
  std::vector<std::string> bad;
  auto expect = [&](const std::string &what, double got, double want) {
    if (!(std::abs(got - want) <= 1e-6))
      bad.push_back(what + ": got " + fmt("%.9g", got) + ", want " +
                    fmt("%.9g", want));
  };
  const Tokens abc = {"a", "b", "c"};
  expect("f1 identity", unigram_f1(abc, abc), 1.0);
  expect("f1 disjoint", unigram_f1({"a", "b"}, {"c", "d"}), 0.0);
  expect("f1 partial", unigram_f1(abc, {"a", "b", "d"}), 2.0 / 3.0);

  const Tokens hyp = tokenize("the cat sat on the mat");
  const Tokens ref = tokenize("the cat is on the mat");
  const auto cb = corpus_bleu({hyp}, {ref}, 4, BleuSmoothing::kNone);
  expect("bleu-1 partial", cb.at(1), 5.0 / 6.0);
  expect("bleu-2 partial", cb.at(2), std::sqrt(0.5));
  expect("bleu-3 partial", cb.at(3), 0.5);
  expect("bleu-4 partial", cb.at(4), 0.0);
  for (std::size_t n = 1; n <= 4; ++n)
    expect("bleu-" + std::to_string(n) + " cross-check", cb.at(int(n)),
           reference_bleu({hyp}, {ref}, n, false));
  const auto sb = bleu(hyp, ref, 4, BleuSmoothing::kAddOne);
  for (std::size_t n = 1; n <= 4; ++n)
    expect("smoothed bleu-" + std::to_string(n) + " cross-check",
           sb.at(int(n)), reference_bleu({hyp}, {ref}, n, true));
  const auto shortb = corpus_bleu({{"the", "cat"}},
                                  {{"the", "cat", "sat", "on"}}, 2,
                                  BleuSmoothing::kNone);
  expect("bleu brevity", shortb.at(1), std::exp(-1.0));
  const std::vector<Tokens> hs = {hyp, tokenize("a dog ran home"),
                                  tokenize("on the mat the cat sat")};
  const std::vector<Tokens> rs = {ref, tokenize("the dog ran to the park"),
                                  tokenize("the cat sat on the mat")};
  const auto cc = corpus_bleu(hs, rs, 4, BleuSmoothing::kNone);
  for (std::size_t n = 1; n <= 4; ++n)
    expect("corpus bleu-" + std::to_string(n) + " cross-check", cc.at(int(n)),
           reference_bleu(hs, rs, n, false));
  for (int n = 1; n <= 3; ++n)
    expect("bleu identity", bleu(abc, abc).at(n), 1.0);
  expect("bleu disjoint", bleu({"x", "y"}, abc).at(1), 0.0);

  const auto ri = rouge(abc, abc);
  for (const char *k : {"R1", "R2", "RL"}) expect("rouge identity", ri.at(k), 1.0);
  const auto rd = rouge({"x", "y"}, abc);
  for (const char *k : {"R1", "R2", "RL"}) expect("rouge disjoint", rd.at(k), 0.0);
  const Tokens lh = {"a", "b", "c", "d", "e"}, lr = {"a", "c", "e", "f"};
  const double lcs = static_cast<double>(brute_force_lcs(lh, lr));
  expect("lcs length", static_cast<double>(lcs_length(lh, lr)), lcs);
  const double p = lcs / 5.0, r = lcs / 4.0;
  expect("rouge-l partial", rouge(lh, lr).at("RL"), 2 * p * r / (p + r));
  expect("rouge-2 partial", rouge(lh, lr).at("R2"), 0.0);

  expect("distinct unique", distinct({abc}, 1), 1.0);
  expect("distinct repeated", distinct({{"a", "a", "a", "a"}}, 1), 0.25);
  expect("distinct duplicated corpus", distinct({abc, abc}, 1), 0.5);

  std::vector<Ranking> top;
  for (std::size_t i = 0; i < 5; ++i)
    top.push_back({{0.1, 0.2, 0.9, 0.3}, 2});
  expect("recall top", recall_at_k(top, 1), 1.0);
  expect("recall k = n", recall_at_k(top, 4), 1.0);
  Rng rng(12345);
  std::vector<Ranking> rand;
  for (std::size_t i = 0; i < 10000; ++i) {
    Ranking rk;
    for (int j = 0; j < 10; ++j) rk.scores.push_back(rng.uniform());
    rk.true_index = rng.below(10);
    rand.push_back(rk);
  }
  const double r1 = recall_at_k(rand, 1);
  if (std::abs(r1 - 0.1) > 0.01)
    bad.push_back("recall@1 random scores: got " + fmt("%.4f", r1));
  return bad;
}

CheckResult check_elbo_bound(std::size_t instances, std::uint64_t seed,
                             KlFn kl_fn) {
  return timed("elbo-bound", [&] {
    const ElboBoundStats s = elbo_bound_stats(instances, seed, kl_fn);
    CheckResult r;
    r.passed = s.min_slack >= -1e-9 && s.max_posterior_gap < 1e-9;
    r.detail = std::to_string(s.instances) + " instances, min slack " +
               fmt("%.3g", s.min_slack) + ", max true-posterior gap " +
               fmt("%.3g", s.max_posterior_gap);
    return r;
  });
}

CheckResult check_gradients(std::size_t seeds, std::uint64_t seed) {
  return timed("gradients", [&] {
    const GradCheckStats s = gradient_check_stats(seeds, seed);
    CheckResult r;
    r.passed = s.max_rel_error < 1e-4;
    r.detail = std::to_string(seeds) + " seeds, " +
               std::to_string(s.coordinates) + " coordinates, max rel error " +
               fmt("%.3g", s.max_rel_error) + " (" + s.worst + ")";
    return r;
  });
}

CheckResult check_reinforce(std::size_t instances, std::uint64_t seed) {
  return timed("reinforce", [&] {
    const ReinforceStats s = reinforce_stats(instances, seed);
    CheckResult r;
    r.passed = s.max_abs_error < 1e-9 && s.max_fd_rel_error < 1e-4;
    r.detail = std::to_string(instances) +
               " instances, max |estimator - exact| " +
               fmt("%.3g", s.max_abs_error) + ", exact vs fd " +
               fmt("%.3g", s.max_fd_rel_error);
    return r;
  });
}

CheckResult check_metric_fixtures() {
  return timed("metrics", [&] {
    const auto bad = metric_fixture_failures();
    CheckResult r;
    r.passed = bad.empty();
    r.detail = bad.empty() ? "all fixtures hold" : bad.front();
    for (std::size_t i = 1; i < bad.size(); ++i) r.detail += "; " + bad[i];
    return r;
  });
}

std::vector<CheckResult> run_selfcheck(std::uint64_t seed) {
  return {check_elbo_bound(200, seed), check_gradients(10, seed),
          check_reinforce(10, seed), check_metric_fixtures()};
}

}  // namespace pkgc
