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

// Inference: memory selection from p(Zp|C), knowledge selection from
// p(Zk|C,Zp), beam-search decoding, and the evaluation harness.

#ifndef PKGC_INFERENCE_H_
#define PKGC_INFERENCE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pkgc/metrics.h"
#include "pkgc/parallel.h"
#include "pkgc/rng.h"
#include "pkgc/training.h"

namespace pkgc {

struct DecodeConfig {
  std::size_t beam_width = 5;
  std::size_t min_len = 10;
  double repetition_penalty = 1.0;  // multiplicative on logits
  double length_penalty = 0.0;      // score / ((5 + len) / 6)^lp
  std::size_t max_len = 64;
  std::optional<TokenId> eos = kEos;
  // Never emitted.
  std::vector<TokenId> banned = {kPad, kUnk, kCls, kSep, kBos};

  std::vector<std::string> problems() const;
};

// Step-wise scorer driven by beam search. State is opaque.
class DecodeSource {
 public:
  using State = std::vector<double>;
  virtual ~DecodeSource() = default;
  virtual State start() const = 0;
  virtual std::vector<double> logits(const State &state) const = 0;
  virtual State advance(const State &state, TokenId token) const = 0;
};

class GeneratorSource : public DecodeSource {
 public:
  GeneratorSource(const Generator &gen, std::span<const double> params,
                  GenerationCondition cond)
      : gen_(gen), params_(params), cond_(cond) {}
  State start() const override { return gen_.start(params_, cond_); }
  std::vector<double> logits(const State &s) const override {
    return gen_.next_token_logits(params_, s);
  }
  State advance(const State &s, TokenId t) const override {
    return gen_.advance(params_, s, t);
  }

 private:
  const Generator &gen_;
  std::span<const double> params_;
  GenerationCondition cond_;
};

struct Hypothesis {
  TokenIds tokens;         // without the end token
  double log_prob = 0.0;   // sum of per-step log-probabilities
  double score = 0.0;      // length-penalty adjusted
  bool finished = false;   // ended with the end token
};

// Log-probabilities the search uses at one step, after banning, end-token
// masking below min_len and the repetition penalty.
std::vector<double> step_log_probs(const std::vector<double> &logits,
                                   const TokenIds &prefix,
                                   const DecodeConfig &cfg);
double length_adjusted(double log_prob, std::size_t length,
                       double length_penalty);

// Best hypothesis by adjusted score. Ties go to the lower token ids.
Hypothesis beam_search(const DecodeSource &source, const DecodeConfig &cfg);

// The conditioning material respond() may read. There is no response
// field, so the reference can never leak into decoding.
struct Query {
  std::vector<TokenIds> context;
  std::vector<TokenIds> knowledge;
  std::vector<TokenIds> memory;
};

Query query_from(const EncodedCase &c);
// Retrieves memory for user_key (MissingUserError when unknown).
Query make_query(const Vocab &vocab, const std::vector<Tokens> &context,
                 const std::string &user_key,
                 const std::vector<Tokens> &knowledge,
                 const MemoryRepository &repo);

struct SelectionConfig {
  std::size_t m = 2;    // fragments conditioned on
  bool sample = true;   // m == 1 / knowledge: draw; otherwise argmax
};

struct ResponseTrace {
  CategoricalDistribution p_zp;
  CategoricalDistribution p_zk;
};

struct Response {
  std::vector<std::size_t> zp;  // in probability order
  std::size_t zk = 0;
  TokenIds tokens;
  Tokens words;
  ResponseTrace trace;
};

// Selection only: memory by top-m of p(Zp|C) (a draw when m == 1 and
// sampling), then p(Zk|C,P_sel).
struct Selection {
  std::vector<std::size_t> zp;
  std::size_t zk = 0;
  ResponseTrace trace;
};

Selection select_latents(const Model &model, const ParamSet &params,
                         const Query &q, const SelectionConfig &sel, Rng &rng);

Response respond(const Model &model, const ParamSet &params, const Query &q,
                 const DecodeConfig &decode, const SelectionConfig &sel,
                 Rng &rng);

struct EvalConfig {
  DecodeConfig decode;
  SelectionConfig select;
  std::vector<std::size_t> ks = {1, 2, 5, 10};
  std::uint64_t seed = 0;
  bool generate = true;  // false: selection recall only
  Execution execution = Execution::kParallel;
};

struct EvalReport {
  MetricsReport text;                      // empty when !generate
  std::map<std::size_t, double> recall;    // prior knowledge Recall@k
  std::size_t n_cases = 0;
  std::vector<Response> responses;         // case order

  // {"bleu","rouge","distinct","f1","recall","n_cases"}; the text entries
  // are empty (f1 null) when nothing was generated.
  nlohmann::ordered_json to_json() const;
};

// Recall@k ranks p(Zk|C,P_sel) against ground truth when present, pseudo
// labels otherwise; k beyond |K| counts as a hit. Case i draws from
// Rng::derive(seed, i).
EvalReport evaluate(const Model &model, const ParamSet &params,
                    std::span<const PreparedCase> cases, const EvalConfig &cfg);

}  // namespace pkgc

#endif  // PKGC_INFERENCE_H_
