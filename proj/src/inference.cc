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

#include "pkgc/inference.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "pkgc/errors.h"

namespace pkgc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

std::vector<std::string> DecodeConfig::problems() const {
  std::vector<std::string> p;
  if (beam_width == 0) p.push_back("decode.beam_width must be >= 1");
  if (max_len == 0) p.push_back("decode.max_len must be >= 1");
  if (min_len > max_len) p.push_back("decode.min_len must be <= decode.max_len");
  if (!(repetition_penalty > 0.0))
    p.push_back("decode.repetition_penalty must be > 0");
  if (!(length_penalty >= 0.0))
    p.push_back("decode.length_penalty must be >= 0");
  return p;
}

std::vector<double> step_log_probs(const std::vector<double> &logits,
                                   const TokenIds &prefix,
                                   const DecodeConfig &cfg) {
  std::vector<double> z = logits;
  const auto in_range = [&](TokenId t) {
    return t >= 0 && static_cast<std::size_t>(t) < z.size();
  };
  if (cfg.repetition_penalty != 1.0) {
    const std::set<TokenId> seen(prefix.begin(), prefix.end());
    for (TokenId t : seen)
      if (in_range(t))
        z[t] = z[t] > 0.0 ? z[t] / cfg.repetition_penalty
                          : z[t] * cfg.repetition_penalty;
  }
  for (TokenId t : cfg.banned)
    if (in_range(t) && (!cfg.eos || t != *cfg.eos)) z[t] = kNegInf;
  if (cfg.eos && in_range(*cfg.eos) && prefix.size() < cfg.min_len)
    z[*cfg.eos] = kNegInf;
  if (std::none_of(z.begin(), z.end(),
                   [](double x) { return std::isfinite(x); }))
    throw ArgumentError("decode: every token is masked");
  return log_softmax(z);
}

double length_adjusted(double log_prob, std::size_t length,
                       double length_penalty) {
  if (length_penalty == 0.0) return log_prob;
  return log_prob /
         std::pow((5.0 + static_cast<double>(length)) / 6.0, length_penalty);
}

Hypothesis beam_search(const DecodeSource &source, const DecodeConfig &cfg) {
  if (const auto p = cfg.problems(); !p.empty()) throw ConfigError(p.front());
  struct Live {
    TokenIds tokens;
    double log_prob;
    DecodeSource::State state;
  };
  struct Expansion {
    double log_prob;
    std::size_t beam;
    TokenId token;
  };
  std::vector<Live> live{{{}, 0.0, source.start()}};
  std::vector<Hypothesis> done;

  for (std::size_t step = 0; step < cfg.max_len && !live.empty(); ++step) {
    std::vector<Expansion> ex;
    for (std::size_t b = 0; b < live.size(); ++b) {
      const auto lp =
          step_log_probs(source.logits(live[b].state), live[b].tokens, cfg);
      for (std::size_t t = 0; t < lp.size(); ++t)
        if (std::isfinite(lp[t]))
          ex.push_back({live[b].log_prob + lp[t], b, static_cast<TokenId>(t)});
    }
    const std::size_t keep = std::min(cfg.beam_width, ex.size());
    std::partial_sort(ex.begin(), ex.begin() + keep, ex.end(),
                      [](const Expansion &a, const Expansion &b) {
                        if (a.log_prob != b.log_prob)
                          return a.log_prob > b.log_prob;
                        if (a.beam != b.beam) return a.beam < b.beam;
                        return a.token < b.token;
                      });
    std::vector<Live> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const Expansion &e = ex[i];
      const Live &from = live[e.beam];
      if (cfg.eos && e.token == *cfg.eos) {
        done.push_back({from.tokens, e.log_prob,
                        length_adjusted(e.log_prob, from.tokens.size(),
                                        cfg.length_penalty),
                        true});
        continue;
      }
      Live l{from.tokens, e.log_prob, source.advance(from.state, e.token)};
      l.tokens.push_back(e.token);
      next.push_back(std::move(l));
    }
    live = std::move(next);
  }
  for (auto &l : live)
    done.push_back({l.tokens, l.log_prob,
                    length_adjusted(l.log_prob, l.tokens.size(),
                                    cfg.length_penalty),
                    false});

  auto best = std::min_element(
      done.begin(), done.end(), [](const Hypothesis &a, const Hypothesis &b) {
        if (a.score != b.score) return a.score > b.score;
        return a.tokens < b.tokens;
      });
  return *best;
}

Query query_from(const EncodedCase &c) {
  return Query{c.context, c.knowledge, c.memory};
}

Query make_query(const Vocab &vocab, const std::vector<Tokens> &context,
                 const std::string &user_key,
                 const std::vector<Tokens> &knowledge,
                 const MemoryRepository &repo) {
  const MemorySet mem = retrieve_memory(repo, user_key);
  Query q;
  for (const auto &u : context) q.context.push_back(vocab.encode(u));
  for (const auto &k : knowledge) q.knowledge.push_back(vocab.encode(k));
  for (const auto &f : mem.fragments) q.memory.push_back(vocab.encode(f));
  return q;
}

Selection select_latents(const Model &model, const ParamSet &params,
                         const Query &q, const SelectionConfig &sel, Rng &rng) {
  if (q.knowledge.empty()) throw ArgumentError("respond: empty knowledge set");
  if (q.memory.empty()) throw ArgumentError("respond: empty memory set");
  if (sel.m == 0) throw ArgumentError("respond: m must be >= 1");
  const LatentInputs in{q.context, {}, q.memory, q.knowledge};
  Selection s;
  s.trace.p_zp = prior_zp(model.latents, params.theta, in).dist;
  const std::size_t m = std::min(sel.m, q.memory.size());
  if (m == 1)
    s.zp = {sel.sample ? sample(s.trace.p_zp, rng) : s.trace.p_zp.argmax()};
  else
    s.zp = s.trace.p_zp.top(m);
  const TokenIds p_sel = concat_fragments(q.memory, s.zp);
  s.trace.p_zk = prior_zk(model.latents, params.theta, in, p_sel).dist;
  s.zk = sel.sample ? sample(s.trace.p_zk, rng) : s.trace.p_zk.argmax();
  return s;
}

Response respond(const Model &model, const ParamSet &params, const Query &q,
                 const DecodeConfig &decode, const SelectionConfig &sel,
                 Rng &rng) {
  Selection s = select_latents(model, params, q, sel, rng);
  const TokenIds p_sel = concat_fragments(q.memory, s.zp);
  const GeneratorSource source(
      *model.generator, params.gen,
      GenerationCondition{q.context, p_sel, q.knowledge[s.zk]});
  Response r;
  r.zp = std::move(s.zp);
  r.zk = s.zk;
  r.trace = std::move(s.trace);
  r.tokens = beam_search(source, decode).tokens;
  r.words = model.vocab.decode(r.tokens);
  return r;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  if (!responses.empty()) {
    j = text.to_json();
  } else {
    j["bleu"] = nlohmann::ordered_json::object();
    j["rouge"] = nlohmann::ordered_json::object();
    j["distinct"] = nlohmann::ordered_json::object();
    j["f1"] = nullptr;
  }
  j["recall"] = nlohmann::ordered_json::object();
  for (const auto &[k, v] : recall) j["recall"][std::to_string(k)] = v;
  j["n_cases"] = n_cases;
  return j;
}

EvalReport evaluate(const Model &model, const ParamSet &params,
                    std::span<const PreparedCase> cases,
                    const EvalConfig &cfg) {
  if (cases.empty()) throw DataError("evaluate: no cases");
  for (std::size_t k : cfg.ks)
    if (k == 0) throw ConfigError("eval.recall_k entries must be >= 1");
  if (const auto p = cfg.decode.problems(); !p.empty())
    throw ConfigError(p.front());

  const std::size_t n = cases.size();
  std::vector<std::size_t> ranks(n);
  std::vector<std::size_t> sizes(n);
  std::vector<Response> responses(cfg.generate ? n : 0);
  for_each_index(cfg.execution, n, [&](std::size_t i) {
    const PreparedCase &c = cases[i];
    Rng rng = Rng::derive(cfg.seed, i);
    const Query q = query_from(c.enc);
    const std::size_t target = c.truth ? c.truth->zk : c.labels.k_bar;
    if (cfg.generate) {
      responses[i] = respond(model, params, q, cfg.decode, cfg.select, rng);
      ranks[i] = rank_of(responses[i].trace.p_zk.probs(), target);
    } else {
      const Selection s = select_latents(model, params, q, cfg.select, rng);
      ranks[i] = rank_of(s.trace.p_zk.probs(), target);
    }
    sizes[i] = c.enc.knowledge.size();
  });

  EvalReport report;
  report.n_cases = n;
  for (std::size_t k : cfg.ks) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (k >= sizes[i] || ranks[i] < k) ++hits;
    report.recall[k] = static_cast<double>(hits) / static_cast<double>(n);
  }
  if (cfg.generate) {
    std::vector<Tokens> hyps, refs;
    for (std::size_t i = 0; i < n; ++i) {
      hyps.push_back(responses[i].words);
      refs.push_back(cases[i].reference);
    }
    report.text = compute_metrics(hyps, refs);
    report.responses = std::move(responses);
  }
  return report;
}

}  // namespace pkgc
