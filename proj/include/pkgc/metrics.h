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

// Response-quality metrics (BLEU, ROUGE, Distinct, unigram F1) and
// selection Recall@k. Everything here is pure and thread-safe.

#ifndef PKGC_METRICS_H_
#define PKGC_METRICS_H_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "pkgc/corpus.h"

namespace pkgc {

// F1 of the clipped unigram-multiset overlap. Throws ArgumentError on
// empty input.
double unigram_f1(const Tokens &hyp, const Tokens &ref);

enum class BleuSmoothing {
  kNone,
  kAddOne,  // add-one on orders >= 2
};

// BLEU-1..max_n for a single pair. Sentence-level default smoothing.
std::map<int, double> bleu(const Tokens &hyp, const Tokens &ref,
                           int max_n = 4,
                           BleuSmoothing smoothing = BleuSmoothing::kAddOne);

// Corpus-level BLEU: n-gram matches and lengths are pooled over all pairs
// before the precision and brevity penalty are formed.
std::map<int, double> corpus_bleu(const std::vector<Tokens> &hyps,
                                  const std::vector<Tokens> &refs,
                                  int max_n = 4,
                                  BleuSmoothing smoothing = BleuSmoothing::kNone);

// ROUGE-1, ROUGE-2 and ROUGE-L F-measures, keyed "R1", "R2", "RL".
std::map<std::string, double> rouge(const Tokens &hyp, const Tokens &ref);

std::size_t lcs_length(const Tokens &a, const Tokens &b);

// Unique n-grams over total n-grams across the whole corpus.
double distinct(const std::vector<Tokens> &hyps, int n);

struct Ranking {
  std::vector<double> scores;
  std::size_t true_index = 0;
};

// Fraction of rankings whose true index is among the k best scores,
// ties going to the lower index.
double recall_at_k(const std::vector<Ranking> &rankings, std::size_t k);

// Position of `index` in the descending order of `scores` (0 = best).
std::size_t rank_of(const std::vector<double> &scores, std::size_t index);

struct MetricsReport {
  std::map<int, double> bleu;
  std::map<std::string, double> rouge;
  std::map<int, double> distinct;
  double f1 = 0.0;
  std::map<int, double> recall_at;

  nlohmann::ordered_json to_json() const;
  // One level deep: "bleu-1", ..., "rouge-l", "distinct-2", "f1",
  // "recall@1", ...
  nlohmann::ordered_json to_flat_json() const;
  // Fixed-order table: B-1..B-4, R-1, R-2, R-L, D-1, D-2, F1 (percent).
  std::string format_table() const;
};

// Corpus-level BLEU, ROUGE and F1 averaged over pairs, Distinct over the
// hypothesis corpus. recall_at is left for the caller.
MetricsReport compute_metrics(const std::vector<Tokens> &hyps,
                              const std::vector<Tokens> &refs);

}  // namespace pkgc

#endif  // PKGC_METRICS_H_
