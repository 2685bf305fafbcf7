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

#include "pkgc/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "pkgc/errors.h"

namespace pkgc {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const Tokens &t, int n) {
  NgramCounts counts;
  if (n <= 0 || t.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= t.size(); ++i)
    ++counts[std::vector<std::string>(t.begin() + i, t.begin() + i + n)];
  return counts;
}

std::size_t total(const NgramCounts &c) {
  std::size_t s = 0;
  for (const auto &[g, n] : c) s += n;
  return s;
}

std::size_t clipped_overlap(const NgramCounts &hyp, const NgramCounts &ref) {
  std::size_t overlap = 0;
  for (const auto &[g, n] : hyp) {
    auto it = ref.find(g);
    if (it != ref.end()) overlap += std::min(n, it->second);
  }
  return overlap;
}

double f_measure(double overlap, double hyp_total, double ref_total) {
  if (overlap == 0.0 || hyp_total == 0.0 || ref_total == 0.0) return 0.0;
  const double p = overlap / hyp_total;
  const double r = overlap / ref_total;
  return 2.0 * p * r / (p + r);
}

void require_non_empty(const Tokens &hyp, const Tokens &ref) {
  if (hyp.empty() || ref.empty())
    throw ArgumentError("metric undefined for empty token sequence");
}

std::map<int, double> bleu_from_counts(const std::vector<std::size_t> &match,
                                       const std::vector<std::size_t> &possible,
                                       std::size_t hyp_len, std::size_t ref_len,
                                       int max_n, BleuSmoothing smoothing) {
  std::map<int, double> out;
  double log_sum = 0.0;
  bool zero = false;
  const double bp =
      hyp_len == 0 ? 0.0
      : hyp_len > ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) / hyp_len);
  for (int n = 1; n <= max_n; ++n) {
    double num = static_cast<double>(match[n - 1]);
    double den = static_cast<double>(possible[n - 1]);
    if (smoothing == BleuSmoothing::kAddOne && n >= 2) {
      num += 1.0;
      den += 1.0;
    }
    if (num == 0.0 || den == 0.0) zero = true;
    if (!zero) log_sum += std::log(num / den);
    out[n] = zero ? 0.0 : bp * std::exp(log_sum / n);
  }
  return out;
}

}  // namespace

double unigram_f1(const Tokens &hyp, const Tokens &ref) {
  require_non_empty(hyp, ref);
  const auto h = count_ngrams(hyp, 1);
  const auto r = count_ngrams(ref, 1);
  return f_measure(static_cast<double>(clipped_overlap(h, r)),
                   static_cast<double>(hyp.size()),
                   static_cast<double>(ref.size()));
}

std::map<int, double> bleu(const Tokens &hyp, const Tokens &ref, int max_n,
                           BleuSmoothing smoothing) {
  return corpus_bleu({hyp}, {ref}, max_n, smoothing);
}

std::map<int, double> corpus_bleu(const std::vector<Tokens> &hyps,
                                  const std::vector<Tokens> &refs, int max_n,
                                  BleuSmoothing smoothing) {
  if (hyps.size() != refs.size() || hyps.empty())
    throw ArgumentError("bleu needs equally many, non-zero hyps and refs");
  if (max_n < 1) throw ArgumentError("bleu max_n must be >= 1");
  std::vector<std::size_t> match(max_n, 0), possible(max_n, 0);
  std::size_t hyp_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    require_non_empty(hyps[i], refs[i]);
    hyp_len += hyps[i].size();
    ref_len += refs[i].size();
    for (int n = 1; n <= max_n; ++n) {
      const auto h = count_ngrams(hyps[i], n);
      const auto r = count_ngrams(refs[i], n);
      match[n - 1] += clipped_overlap(h, r);
      possible[n - 1] += total(h);
    }
  }
  return bleu_from_counts(match, possible, hyp_len, ref_len, max_n, smoothing);
}

std::size_t lcs_length(const Tokens &a, const Tokens &b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::map<std::string, double> rouge(const Tokens &hyp, const Tokens &ref) {
  require_non_empty(hyp, ref);
  std::map<std::string, double> out;
  for (int n : {1, 2}) {
    const auto h = count_ngrams(hyp, n);
    const auto r = count_ngrams(ref, n);
    out[n == 1 ? "R1" : "R2"] =
        f_measure(static_cast<double>(clipped_overlap(h, r)),
                  static_cast<double>(total(h)), static_cast<double>(total(r)));
  }
  out["RL"] = f_measure(static_cast<double>(lcs_length(hyp, ref)),
                        static_cast<double>(hyp.size()),
                        static_cast<double>(ref.size()));
  return out;
}

double distinct(const std::vector<Tokens> &hyps, int n) {
  if (n < 1) throw ArgumentError("distinct n must be >= 1");
  std::set<std::vector<std::string>> unique;
  std::size_t count = 0;
  for (const auto &h : hyps) {
    for (const auto &[g, c] : count_ngrams(h, n)) {
      unique.insert(g);
      count += c;
    }
  }
  if (count == 0)
    throw ArgumentError("distinct-" + std::to_string(n) +
                        " undefined: corpus has no n-grams");
  return static_cast<double>(unique.size()) / static_cast<double>(count);
}

std::size_t rank_of(const std::vector<double> &scores, std::size_t index) {
  const double s = scores.at(index);
  std::size_t rank = 0;
  for (std::size_t j = 0; j < scores.size(); ++j)
    if (scores[j] > s || (scores[j] == s && j < index)) ++rank;
  return rank;
}

double recall_at_k(const std::vector<Ranking> &rankings, std::size_t k) {
  if (rankings.empty()) throw ArgumentError("recall_at_k: no rankings");
  if (k == 0) throw ArgumentError("recall_at_k: k must be >= 1");
  std::size_t hits = 0;
  for (const auto &r : rankings) {
    if (k > r.scores.size())
      throw ArgumentError("recall_at_k: k=" + std::to_string(k) +
                          " exceeds candidate count " +
                          std::to_string(r.scores.size()));
    if (r.true_index >= r.scores.size())
      throw ArgumentError("recall_at_k: true index out of range");
    if (rank_of(r.scores, r.true_index) < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["bleu"] = nlohmann::ordered_json::object();
  for (const auto &[n, v] : bleu) j["bleu"][std::to_string(n)] = v;
  j["rouge"] = nlohmann::ordered_json::object();
  for (const auto &[k, v] : rouge) j["rouge"][k] = v;
  j["distinct"] = nlohmann::ordered_json::object();
  for (const auto &[n, v] : distinct) j["distinct"][std::to_string(n)] = v;
  j["f1"] = f1;
  j["recall"] = nlohmann::ordered_json::object();
  for (const auto &[k, v] : recall_at) j["recall"][std::to_string(k)] = v;
  return j;
}

nlohmann::ordered_json MetricsReport::to_flat_json() const {
  nlohmann::ordered_json j;
  for (const auto &[n, v] : bleu) j["bleu-" + std::to_string(n)] = v;
  for (const auto &[k, v] : rouge) {
    std::string name = "rouge-" + k.substr(1);
    if (name == "rouge-L") name = "rouge-l";
    j[name] = v;
  }
  for (const auto &[n, v] : distinct) j["distinct-" + std::to_string(n)] = v;
  j["f1"] = f1;
  for (const auto &[k, v] : recall_at) j["recall@" + std::to_string(k)] = v;
  return j;
}

std::string MetricsReport::format_table() const {
  auto get = [](const auto &m, const auto &key) {
    auto it = m.find(key);
    return it == m.end() ? 0.0 : it->second * 100.0;
  };
  char line[512];
  std::snprintf(line, sizeof(line),
                "%7s %7s %7s %7s %7s %7s %7s %7s %7s %7s\n"
                "%7.2f %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f\n",
                "B-1", "B-2", "B-3", "B-4", "R-1", "R-2", "R-L", "D-1", "D-2",
                "F1", get(bleu, 1), get(bleu, 2), get(bleu, 3), get(bleu, 4),
                get(rouge, std::string("R1")), get(rouge, std::string("R2")),
                get(rouge, std::string("RL")), get(distinct, 1),
                get(distinct, 2), f1 * 100.0);
  return line;
}

MetricsReport compute_metrics(const std::vector<Tokens> &hyps,
                              const std::vector<Tokens> &refs) {
  if (hyps.size() != refs.size() || hyps.empty())
    throw ArgumentError("compute_metrics needs equally many hyps and refs");
  MetricsReport report;
  report.bleu = corpus_bleu(hyps, refs, 4, BleuSmoothing::kNone);
  double r1 = 0, r2 = 0, rl = 0, f1 = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const auto r = rouge(hyps[i], refs[i]);
    r1 += r.at("R1");
    r2 += r.at("R2");
    rl += r.at("RL");
    f1 += unigram_f1(hyps[i], refs[i]);
  }
  const double n = static_cast<double>(hyps.size());
  report.rouge = {{"R1", r1 / n}, {"R2", r2 / n}, {"RL", rl / n}};
  report.distinct = {{1, distinct(hyps, 1)}, {2, distinct(hyps, 2)}};
  report.f1 = f1 / n;
  return report;
}

}  // namespace pkgc
