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

#include "pkgc/latent.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pkgc/errors.h"

namespace pkgc {

// ---------------------------------------------------------------------------
// CategoricalDistribution

CategoricalDistribution::CategoricalDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw ArgumentError("distribution over zero candidates");
  double s = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0))
      throw NumericError("probability outside [0, 1]");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9)
    throw NumericError("probabilities sum to " + std::to_string(s));
}

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw ArgumentError("log_softmax of empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(mx)) throw NumericError("non-finite logit");
  double s = 0.0;
  for (double l : logits) s += std::exp(l - mx);
  const double lse = mx + std::log(s);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

CategoricalDistribution CategoricalDistribution::from_logits(
    std::span<const double> logits) {
  if (logits.empty()) throw ArgumentError("softmax of empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(mx)) throw NumericError("non-finite logit");
  std::vector<double> p(logits.size());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    s += p[i];
  }
  for (double &x : p) x /= s;
  return CategoricalDistribution(std::move(p));
}

CategoricalDistribution CategoricalDistribution::uniform(std::size_t n) {
  if (n == 0) throw ArgumentError("uniform over zero candidates");
  return CategoricalDistribution(std::vector<double>(n, 1.0 / n));
}

std::size_t CategoricalDistribution::argmax() const {
  return static_cast<std::size_t>(
      std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

std::vector<std::size_t> CategoricalDistribution::top(std::size_t m) const {
  std::vector<std::size_t> idx(probs_.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return probs_[a] > probs_[b];
  });
  idx.resize(std::min(m, idx.size()));
  return idx;
}

std::size_t sample_with_uniform(const CategoricalDistribution &dist,
                                double u) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    acc += dist[i];
    last_positive = i;
    if (u < acc) return i;
  }
  // u landed in the rounding slack above the accumulated mass.
  return last_positive;
}

std::size_t sample(const CategoricalDistribution &dist, Rng &rng) {
  return sample_with_uniform(dist, rng.uniform());
}

double kl(const CategoricalDistribution &p, const CategoricalDistribution &q) {
  if (p.size() != q.size())
    throw NumericError("kl: support sizes differ (" + std::to_string(p.size()) +
                       " vs " + std::to_string(q.size()) + ")");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0)
      throw NumericError("kl: q has zero mass where p is positive");
    s += p[i] * (std::log(p[i]) - std::log(std::max(q[i], kKlFloor)));
  }
  return std::max(s, 0.0);
}

CategoricalDistribution temper(const CategoricalDistribution &dist, double t) {
  if (!(t > 0.0)) throw ArgumentError("temper: temperature must be > 0");
  double mx = -INFINITY;
  for (double p : dist.probs())
    if (p > 0.0) mx = std::max(mx, std::log(p));
  std::vector<double> out(dist.size(), 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    out[i] = std::exp((std::log(dist[i]) - mx) / t);
    s += out[i];
  }
  for (double &x : out) x /= s;
  return CategoricalDistribution(std::move(out));
}

// ---------------------------------------------------------------------------
// LatentModels

ParamGroup param_group(DistKind kind) {
  switch (kind) {
    case DistKind::kPriorZp:
    case DistKind::kPriorZk: return ParamGroup::kTheta;
    case DistKind::kPostZp:
    case DistKind::kPostZk: return ParamGroup::kPhi;
    case DistKind::kAuxZp: return ParamGroup::kPsi;
  }
  return ParamGroup::kTheta;
}

const Scorer &LatentModels::scorer(DistKind kind) const {
  switch (param_group(kind)) {
    case ParamGroup::kTheta: return *prior;
    case ParamGroup::kPhi: return *posterior;
    case ParamGroup::kPsi: return *auxiliary;
  }
  return *prior;
}

std::size_t LatentModels::num_params(ParamGroup group) const {
  switch (group) {
    case ParamGroup::kTheta:
      return prior->num_params() * (share_pair_params ? 1 : 2);
    case ParamGroup::kPhi:
      return posterior->num_params() * (share_pair_params ? 1 : 2);
    case ParamGroup::kPsi: return auxiliary->num_params();
  }
  return 0;
}

namespace {

template <typename T>
std::span<T> slice_impl(const LatentModels &m, DistKind kind,
                        std::span<T> group) {
  const std::size_t n = m.scorer(kind).num_params();
  if (group.size() != m.num_params(param_group(kind)))
    throw ArgumentError(std::string("parameter group size mismatch for ") +
                        dist_kind_name(kind));
  if (m.share_pair_params || kind == DistKind::kAuxZp) return group;
  const bool second = kind == DistKind::kPriorZk || kind == DistKind::kPostZk;
  return group.subspan(second ? n : 0, n);
}

}  // namespace

std::span<const double> LatentModels::slice(DistKind kind,
                                            std::span<const double> group) const {
  return slice_impl(*this, kind, group);
}

std::span<double> LatentModels::slice(DistKind kind,
                                      std::span<double> group) const {
  return slice_impl(*this, kind, group);
}

LatentInputs latent_inputs(const EncodedCase &c) {
  return LatentInputs{c.context, c.response, c.memory, c.knowledge};
}

namespace {

LatentEval evaluate(const LatentModels &m, DistKind kind,
                    std::span<const double> group,
                    std::vector<ComposedSequence> composed) {
  LatentEval ev;
  ev.kind = kind;
  ev.composed = std::move(composed);
  auto scored = score_candidates(m.scorer(kind), m.slice(kind, group),
                                 ev.composed);
  ev.logits = std::move(scored.logits);
  ev.dist = std::move(scored.dist);
  return ev;
}

void require_candidates(std::span<const TokenIds> set, const char *what) {
  if (set.empty())
    throw ArgumentError(std::string("empty ") + what + " candidate set");
}

void require_response(const LatentInputs &in, DistKind kind) {
  if (in.response.empty())
    throw ArgumentError(std::string(dist_kind_name(kind)) +
                        " needs the response");
}

void require_index(std::size_t i, std::size_t n, const char *what) {
  if (i >= n)
    throw ArgumentError(std::string(what) + " index " + std::to_string(i) +
                        " out of range [0, " + std::to_string(n) + ")");
}

}  // namespace

LatentEval prior_zp(const LatentModels &m, std::span<const double> theta,
                    const LatentInputs &in) {
  require_candidates(in.memory, "memory");
  std::vector<ComposedSequence> seqs;
  for (const auto &p : in.memory)
    seqs.push_back(compose(DistKind::kPriorZp,
                           {.context = in.context, .memory = p}, m.composer));
  return evaluate(m, DistKind::kPriorZp, theta, std::move(seqs));
}

LatentEval prior_zk(const LatentModels &m, std::span<const double> theta,
                    const LatentInputs &in, std::span<const TokenId> p_sel) {
  require_candidates(in.knowledge, "knowledge");
  std::vector<ComposedSequence> seqs;
  for (const auto &k : in.knowledge)
    seqs.push_back(compose(DistKind::kPriorZk,
                           {.context = in.context, .memory = p_sel,
                            .knowledge = k},
                           m.composer));
  return evaluate(m, DistKind::kPriorZk, theta, std::move(seqs));
}

LatentEval prior_zk(const LatentModels &m, std::span<const double> theta,
                    const LatentInputs &in, std::size_t zp) {
  require_index(zp, in.memory.size(), "memory");
  return prior_zk(m, theta, in, in.memory[zp]);
}

LatentEval post_zp(const LatentModels &m, std::span<const double> phi,
                   const LatentInputs &in) {
  require_candidates(in.memory, "memory");
  require_response(in, DistKind::kPostZp);
  std::vector<ComposedSequence> seqs;
  for (const auto &p : in.memory)
    seqs.push_back(compose(DistKind::kPostZp,
                           {.context = in.context, .response = in.response,
                            .memory = p},
                           m.composer));
  return evaluate(m, DistKind::kPostZp, phi, std::move(seqs));
}

LatentEval post_zk(const LatentModels &m, std::span<const double> phi,
                   const LatentInputs &in, std::size_t zp) {
  require_candidates(in.knowledge, "knowledge");
  require_index(zp, in.memory.size(), "memory");
  require_response(in, DistKind::kPostZk);
  std::vector<ComposedSequence> seqs;
  for (const auto &k : in.knowledge)
    seqs.push_back(compose(DistKind::kPostZk,
                           {.context = in.context, .response = in.response,
                            .memory = std::span<const TokenId>(in.memory[zp]),
                            .knowledge = k},
                           m.composer));
  return evaluate(m, DistKind::kPostZk, phi, std::move(seqs));
}

LatentEval aux_zp(const LatentModels &m, std::span<const double> psi,
                  const LatentInputs &in, std::size_t zk) {
  require_candidates(in.memory, "memory");
  require_index(zk, in.knowledge.size(), "knowledge");
  require_response(in, DistKind::kAuxZp);
  std::vector<ComposedSequence> seqs;
  for (const auto &p : in.memory)
    seqs.push_back(compose(
        DistKind::kAuxZp,
        {.context = in.context, .response = in.response, .memory = p,
         .knowledge = std::span<const TokenId>(in.knowledge[zk])},
        m.composer));
  return evaluate(m, DistKind::kAuxZp, psi, std::move(seqs));
}

void backprop(const LatentModels &m, const LatentEval &ev,
              std::span<const double> group_params,
              std::span<const double> d_logits,
              std::span<double> group_grad) {
  backprop_logits(m.scorer(ev.kind), m.slice(ev.kind, group_params),
                  ev.composed, d_logits, m.slice(ev.kind, group_grad));
}

TokenIds concat_fragments(std::span<const TokenIds> memory,
                          std::span<const std::size_t> order) {
  TokenIds out;
  for (std::size_t i : order) {
    require_index(i, memory.size(), "memory");
    out.insert(out.end(), memory[i].begin(), memory[i].end());
  }
  return out;
}

std::vector<CategoricalDistribution> prior_zk_table(
    const LatentModels &m, std::span<const double> theta,
    const LatentInputs &in) {
  std::vector<CategoricalDistribution> rows;
  for (std::size_t zp = 0; zp < in.memory.size(); ++zp)
    rows.push_back(prior_zk(m, theta, in, zp).dist);
  return rows;
}

std::vector<CategoricalDistribution> post_zk_table(
    const LatentModels &m, std::span<const double> phi,
    const LatentInputs &in) {
  std::vector<CategoricalDistribution> rows;
  for (std::size_t zp = 0; zp < in.memory.size(); ++zp)
    rows.push_back(post_zk(m, phi, in, zp).dist);
  return rows;
}

}  // namespace pkgc
