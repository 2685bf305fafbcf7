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

#include "pkgc/neural.h"

#include <array>
#include <cmath>

#include "pkgc/errors.h"

namespace pkgc {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;
using ConstMat = Eigen::Map<const RowMat>;
using MutMat = Eigen::Map<RowMat>;
using ConstVec = Eigen::Map<const Vec>;
using MutVec = Eigen::Map<Vec>;

// Sequential carving of a flat parameter vector into named blocks.
class Carver {
 public:
  std::size_t take(std::size_t n) {
    const std::size_t at = offset_;
    offset_ += n;
    return at;
  }
  std::size_t size() const { return offset_; }

 private:
  std::size_t offset_ = 0;
};

ConstMat cmat(std::span<const double> p, std::size_t off, std::size_t rows,
              std::size_t cols) {
  return ConstMat(p.data() + off, rows, cols);
}
MutMat mmat(std::span<double> p, std::size_t off, std::size_t rows,
            std::size_t cols) {
  return MutMat(p.data() + off, rows, cols);
}
ConstVec cvec(std::span<const double> p, std::size_t off, std::size_t n) {
  return ConstVec(p.data() + off, n);
}
MutVec mvec(std::span<double> p, std::size_t off, std::size_t n) {
  return MutVec(p.data() + off, n);
}

bool counts_as_content(TokenId t) { return t == kUnk || t >= kNumSpecial; }

Vec tanh_prime_from_output(const Vec &y) {
  return (1.0 - y.array().square()).matrix();
}

void require_size(std::span<const double> params, std::size_t n,
                  const char *who) {
  if (params.size() != n)
    throw ArgumentError(std::string(who) + ": expected " + std::to_string(n) +
                        " parameters, got " + std::to_string(params.size()));
}

}  // namespace

void init_uniform(std::span<double> params, Rng &rng, double scale) {
  for (double &p : params) p = (2.0 * rng.uniform() - 1.0) * scale;
}

// ---------------------------------------------------------------------------
// Scorer

Scorer::Scorer(std::shared_ptr<const Encoder> encoder,
               std::shared_ptr<const ScoringHead> head)
    : encoder_(std::move(encoder)), head_(std::move(head)) {}

std::size_t Scorer::num_params() const {
  return encoder_->num_params() + head_->num_params();
}

double Scorer::logit(std::span<const double> params,
                     const ComposedSequence &seq) const {
  require_size(params, num_params(), "Scorer::logit");
  const std::size_t ne = encoder_->num_params();
  const Vec h = encoder_->encode(params.subspan(0, ne), seq);
  return head_->score(params.subspan(ne), h);
}

void Scorer::accumulate_gradient(std::span<const double> params,
                                 const ComposedSequence &seq, double upstream,
                                 std::span<double> grad) const {
  require_size(params, num_params(), "Scorer::accumulate_gradient");
  if (upstream == 0.0) return;
  const std::size_t ne = encoder_->num_params();
  const Vec h = encoder_->encode(params.subspan(0, ne), seq);
  const Vec dh =
      head_->backward(params.subspan(ne), h, upstream, grad.subspan(ne));
  encoder_->backward(params.subspan(0, ne), seq, dh, grad.subspan(0, ne));
}

// ---------------------------------------------------------------------------
// BagOfEmbeddingsEncoder
//
// Layout: E [V x d] | W1 [H x 7d] | b1 [H] | W2 [d x H] | b2 [d]

struct BagOfEmbeddingsEncoder::Forward {
  std::array<Vec, kRoles> mean;
  std::array<std::vector<TokenId>, kRoles> tokens;
  Vec x, z1, h;
};

BagOfEmbeddingsEncoder::BagOfEmbeddingsEncoder(ModelDims dims) : dims_(dims) {
  if (dims_.vocab_size == 0 || dims_.dim == 0 || dims_.hidden == 0)
    throw ArgumentError("BagOfEmbeddingsEncoder: zero dimension");
}

std::size_t BagOfEmbeddingsEncoder::num_params() const {
  const std::size_t V = dims_.vocab_size, d = dims_.dim, H = dims_.hidden;
  return V * d + H * kFeatureBlocks * d + H + d * H + d;
}

BagOfEmbeddingsEncoder::Forward BagOfEmbeddingsEncoder::forward(
    std::span<const double> params, const ComposedSequence &seq) const {
  const std::size_t V = dims_.vocab_size, d = dims_.dim, H = dims_.hidden;
  const auto E = cmat(params, 0, V, d);
  const std::size_t oW1 = V * d, ob1 = oW1 + H * kFeatureBlocks * d,
                    oW2 = ob1 + H, ob2 = oW2 + d * H;

  Forward f;
  for (auto &m : f.mean) m = Vec::Zero(d);
  const std::size_t last = seq.segments.size() - 1;
  for (std::size_t s = 0; s < seq.segments.size(); ++s) {
    const auto &span = seq.segments[s];
    std::size_t role;
    if (s == last)
      role = 3;
    else if (span.role == SegmentRole::kContext)
      role = 0;
    else if (span.role == SegmentRole::kResponse)
      role = 1;
    else
      role = 2;
    for (std::size_t i = span.begin; i < span.end; ++i) {
      const TokenId t = seq.tokens[i];
      if (!counts_as_content(t)) continue;
      if (static_cast<std::size_t>(t) >= V)
        throw VocabError("encoder: token id " + std::to_string(t) +
                         " outside vocabulary");
      f.mean[role] += E.row(t).transpose();
      f.tokens[role].push_back(t);
    }
  }
  for (std::size_t r = 0; r < kRoles; ++r)
    if (!f.tokens[r].empty()) f.mean[r] /= static_cast<double>(f.tokens[r].size());

  f.x.resize(kFeatureBlocks * d);
  for (std::size_t r = 0; r < kRoles; ++r) f.x.segment(r * d, d) = f.mean[r];
  for (std::size_t r = 0; r < 3; ++r)
    f.x.segment((4 + r) * d, d) = f.mean[3].cwiseProduct(f.mean[r]);

  f.z1 = (cmat(params, oW1, H, kFeatureBlocks * d) * f.x + cvec(params, ob1, H))
             .array()
             .tanh()
             .matrix();
  f.h = (cmat(params, oW2, d, H) * f.z1 + cvec(params, ob2, d))
            .array()
            .tanh()
            .matrix();
  return f;
}

Vec BagOfEmbeddingsEncoder::encode(std::span<const double> params,
                                   const ComposedSequence &seq) const {
  require_size(params, num_params(), "BagOfEmbeddingsEncoder::encode");
  if (seq.segments.empty()) throw ArgumentError("encode: no segments");
  return forward(params, seq).h;
}

void BagOfEmbeddingsEncoder::backward(std::span<const double> params,
                                      const ComposedSequence &seq,
                                      const Vec &d_out,
                                      std::span<double> grad) const {
  require_size(params, num_params(), "BagOfEmbeddingsEncoder::backward");
  const std::size_t V = dims_.vocab_size, d = dims_.dim, H = dims_.hidden;
  const std::size_t oW1 = V * d, ob1 = oW1 + H * kFeatureBlocks * d,
                    oW2 = ob1 + H, ob2 = oW2 + d * H;
  const Forward f = forward(params, seq);

  const Vec da2 = d_out.cwiseProduct(tanh_prime_from_output(f.h));
  mmat(grad, oW2, d, H).noalias() += da2 * f.z1.transpose();
  mvec(grad, ob2, d) += da2;
  const Vec dz1 = cmat(params, oW2, d, H).transpose() * da2;
  const Vec da1 = dz1.cwiseProduct(tanh_prime_from_output(f.z1));
  mmat(grad, oW1, H, kFeatureBlocks * d).noalias() += da1 * f.x.transpose();
  mvec(grad, ob1, H) += da1;
  const Vec dx = cmat(params, oW1, H, kFeatureBlocks * d).transpose() * da1;

  std::array<Vec, kRoles> du;
  for (std::size_t r = 0; r < kRoles; ++r) du[r] = dx.segment(r * d, d);
  for (std::size_t r = 0; r < 3; ++r) {
    const Vec dprod = dx.segment((4 + r) * d, d);
    du[r] += dprod.cwiseProduct(f.mean[3]);
    du[3] += dprod.cwiseProduct(f.mean[r]);
  }
  auto dE = mmat(grad, 0, V, d);
  for (std::size_t r = 0; r < kRoles; ++r) {
    if (f.tokens[r].empty()) continue;
    const Vec g = du[r] / static_cast<double>(f.tokens[r].size());
    for (TokenId t : f.tokens[r]) dE.row(t) += g.transpose();
  }
}

// ---------------------------------------------------------------------------
// MlpHead
//
// Layout: Wf [H x in] | bf [H] | wo [H] | bo [1]

MlpHead::MlpHead(std::size_t in_width, std::size_t hidden)
    : in_(in_width), hidden_(hidden) {}

std::size_t MlpHead::num_params() const {
  return hidden_ * in_ + hidden_ + hidden_ + 1;
}

double MlpHead::score(std::span<const double> params, const Vec &h) const {
  require_size(params, num_params(), "MlpHead::score");
  const std::size_t H = hidden_, obf = H * in_, owo = obf + H, obo = owo + H;
  const Vec z = (cmat(params, 0, H, in_) * h + cvec(params, obf, H))
                    .array()
                    .tanh()
                    .matrix();
  return cvec(params, owo, H).dot(z) + params[obo];
}

Vec MlpHead::backward(std::span<const double> params, const Vec &h,
                      double upstream, std::span<double> grad) const {
  require_size(params, num_params(), "MlpHead::backward");
  const std::size_t H = hidden_, obf = H * in_, owo = obf + H, obo = owo + H;
  const Vec z = (cmat(params, 0, H, in_) * h + cvec(params, obf, H))
                    .array()
                    .tanh()
                    .matrix();
  mvec(grad, owo, H) += upstream * z;
  grad[obo] += upstream;
  const Vec da =
      (upstream * cvec(params, owo, H)).cwiseProduct(tanh_prime_from_output(z));
  mmat(grad, 0, H, in_).noalias() += da * h.transpose();
  mvec(grad, obf, H) += da;
  return cmat(params, 0, H, in_).transpose() * da;
}

std::shared_ptr<const Scorer> make_reference_scorer(const ModelDims &dims) {
  return std::make_shared<const Scorer>(
      std::make_shared<const BagOfEmbeddingsEncoder>(dims),
      std::make_shared<const MlpHead>(dims.dim, dims.hidden));
}

// ---------------------------------------------------------------------------
// Candidate scoring

ScoredCandidates score_candidates(const Scorer &scorer,
                                  std::span<const double> params,
                                  std::span<const ComposedSequence> composed) {
  if (composed.empty())
    throw ArgumentError("score_candidates: empty candidate list");
  ScoredCandidates out;
  out.logits.reserve(composed.size());
  for (const auto &c : composed) out.logits.push_back(scorer.logit(params, c));
  out.dist = CategoricalDistribution::from_logits(out.logits);
  return out;
}

void backprop_logits(const Scorer &scorer, std::span<const double> params,
                     std::span<const ComposedSequence> composed,
                     std::span<const double> d_logits,
                     std::span<double> grad) {
  if (composed.size() != d_logits.size())
    throw ArgumentError("backprop_logits: size mismatch");
  for (std::size_t i = 0; i < composed.size(); ++i)
    scorer.accumulate_gradient(params, composed[i], d_logits[i], grad);
}

// ---------------------------------------------------------------------------
// RecurrentGenerator
//
// Layout: G [V x d] | Wc [d x 3d] | bc [d] | Wh [d x d] | Wx [d x d] |
//         bh [d] | Wo [V x d] | bo [V]

struct RecurrentGenerator::Layout {
  std::size_t G, Wc, bc, Wh, Wx, bh, Wo, bo, total;
};

RecurrentGenerator::RecurrentGenerator(ModelDims dims) : dims_(dims) {
  if (dims_.vocab_size <= kEos || dims_.dim == 0)
    throw ArgumentError("RecurrentGenerator: bad dimensions");
}

RecurrentGenerator::Layout RecurrentGenerator::layout() const {
  const std::size_t V = dims_.vocab_size, d = dims_.dim;
  Carver c;
  Layout l;
  l.G = c.take(V * d);
  l.Wc = c.take(d * 3 * d);
  l.bc = c.take(d);
  l.Wh = c.take(d * d);
  l.Wx = c.take(d * d);
  l.bh = c.take(d);
  l.Wo = c.take(V * d);
  l.bo = c.take(V);
  l.total = c.size();
  return l;
}

std::size_t RecurrentGenerator::num_params() const { return layout().total; }

void RecurrentGenerator::check_target(std::span<const TokenId> target) const {
  for (TokenId t : target)
    if (t < 0 || static_cast<std::size_t>(t) >= dims_.vocab_size)
      throw VocabError("generator: token id " + std::to_string(t) +
                       " outside vocabulary of " +
                       std::to_string(dims_.vocab_size));
}

namespace {

struct CondMeans {
  Vec c;  // [mean C; mean P; mean K]
  std::array<std::vector<TokenId>, 3> tokens;
};

CondMeans condition_means(ConstMat G, std::size_t d, std::size_t V,
                          const GenerationCondition &cond) {
  CondMeans m;
  m.c = Vec::Zero(3 * d);
  auto add = [&](std::size_t slot, std::span<const TokenId> toks) {
    for (TokenId t : toks) {
      if (!counts_as_content(t)) continue;
      if (static_cast<std::size_t>(t) >= V)
        throw VocabError("generator: condition token outside vocabulary");
      m.c.segment(slot * d, d) += G.row(t).transpose();
      m.tokens[slot].push_back(t);
    }
  };
  for (const auto &u : cond.context) add(0, u);
  add(1, cond.memory);
  add(2, cond.knowledge);
  for (std::size_t s = 0; s < 3; ++s)
    if (!m.tokens[s].empty())
      m.c.segment(s * d, d) /= static_cast<double>(m.tokens[s].size());
  return m;
}

double log_sum_exp(const Vec &v) {
  const double mx = v.maxCoeff();
  return mx + std::log((v.array() - mx).exp().sum());
}

}  // namespace

double RecurrentGenerator::log_likelihood(std::span<const double> params,
                                          const GenerationCondition &cond,
                                          std::span<const TokenId> target) const {
  require_size(params, num_params(), "RecurrentGenerator");
  check_target(target);
  const Layout l = layout();
  const std::size_t V = dims_.vocab_size, d = dims_.dim;
  const auto G = cmat(params, l.G, V, d);
  const auto Wh = cmat(params, l.Wh, d, d), Wx = cmat(params, l.Wx, d, d),
             Wo = cmat(params, l.Wo, V, d);
  const auto bh = cvec(params, l.bh, d), bo = cvec(params, l.bo, V);

  const CondMeans cm = condition_means(G, d, V, cond);
  Vec h = (cmat(params, l.Wc, d, 3 * d) * cm.c + cvec(params, l.bc, d))
              .array()
              .tanh()
              .matrix();
  double ll = 0.0;
  TokenId prev = kBos;
  for (TokenId y : target) {
    h = (Wh * h + Wx * G.row(prev).transpose() + bh).array().tanh().matrix();
    const Vec logits = Wo * h + bo;
    ll += logits[y] - log_sum_exp(logits);
    prev = y;
  }
  return ll;
}

double RecurrentGenerator::log_likelihood_gradient(
    std::span<const double> params, const GenerationCondition &cond,
    std::span<const TokenId> target, double upstream,
    std::span<double> grad) const {
  require_size(params, num_params(), "RecurrentGenerator");
  require_size(grad, num_params(), "RecurrentGenerator grad");
  check_target(target);
  const Layout l = layout();
  const std::size_t V = dims_.vocab_size, d = dims_.dim;
  const std::size_t n = target.size();
  const auto G = cmat(params, l.G, V, d);
  const auto Wc = cmat(params, l.Wc, d, 3 * d);
  const auto Wh = cmat(params, l.Wh, d, d), Wx = cmat(params, l.Wx, d, d),
             Wo = cmat(params, l.Wo, V, d);
  const auto bh = cvec(params, l.bh, d), bo = cvec(params, l.bo, V);

  const CondMeans cm = condition_means(G, d, V, cond);
  std::vector<Vec> hs(n + 1);
  std::vector<Vec> probs(n);
  hs[0] = (Wc * cm.c + cvec(params, l.bc, d)).array().tanh().matrix();
  double ll = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const TokenId prev = t == 0 ? static_cast<TokenId>(kBos) : target[t - 1];
    hs[t + 1] = (Wh * hs[t] + Wx * G.row(prev).transpose() + bh)
                    .array()
                    .tanh()
                    .matrix();
    const Vec logits = Wo * hs[t + 1] + bo;
    const double lse = log_sum_exp(logits);
    ll += logits[target[t]] - lse;
    probs[t] = (logits.array() - lse).exp().matrix();
  }
  if (upstream == 0.0) return ll;

  auto dG = mmat(grad, l.G, V, d);
  auto dWo = mmat(grad, l.Wo, V, d);
  auto dbo = mvec(grad, l.bo, V);
  auto dWh = mmat(grad, l.Wh, d, d);
  auto dWx = mmat(grad, l.Wx, d, d);
  auto dbh = mvec(grad, l.bh, d);

  Vec dh_next = Vec::Zero(d);
  for (std::size_t t = n; t-- > 0;) {
    Vec dlogits = -upstream * probs[t];
    dlogits[target[t]] += upstream;
    dWo.noalias() += dlogits * hs[t + 1].transpose();
    dbo += dlogits;
    const Vec dh = Wo.transpose() * dlogits + dh_next;
    const Vec da = dh.cwiseProduct(tanh_prime_from_output(hs[t + 1]));
    const TokenId prev = t == 0 ? static_cast<TokenId>(kBos) : target[t - 1];
    dWh.noalias() += da * hs[t].transpose();
    dWx.noalias() += da * G.row(prev);
    dbh += da;
    dG.row(prev) += (Wx.transpose() * da).transpose();
    dh_next = Wh.transpose() * da;
  }
  const Vec da0 = dh_next.cwiseProduct(tanh_prime_from_output(hs[0]));
  mmat(grad, l.Wc, d, 3 * d).noalias() += da0 * cm.c.transpose();
  mvec(grad, l.bc, d) += da0;
  const Vec dc = Wc.transpose() * da0;
  for (std::size_t s = 0; s < 3; ++s) {
    if (cm.tokens[s].empty()) continue;
    const Vec g = dc.segment(s * d, d) / static_cast<double>(cm.tokens[s].size());
    for (TokenId t : cm.tokens[s]) dG.row(t) += g.transpose();
  }
  return ll;
}

Generator::State RecurrentGenerator::start(std::span<const double> params,
                                           const GenerationCondition &cond) const {
  require_size(params, num_params(), "RecurrentGenerator");
  const Layout l = layout();
  const std::size_t V = dims_.vocab_size, d = dims_.dim;
  const CondMeans cm = condition_means(cmat(params, l.G, V, d), d, V, cond);
  const Vec h0 = (cmat(params, l.Wc, d, 3 * d) * cm.c + cvec(params, l.bc, d))
                     .array()
                     .tanh()
                     .matrix();
  // State is [h ; previous token].
  State s(h0.data(), h0.data() + d);
  s.push_back(static_cast<double>(kBos));
  return s;
}

std::vector<double> RecurrentGenerator::next_token_logits(
    std::span<const double> params, const State &state) const {
  const Layout l = layout();
  const std::size_t V = dims_.vocab_size, d = dims_.dim;
  const Vec h_prev = ConstVec(state.data(), d);
  const auto prev = static_cast<TokenId>(state[d]);
  const Vec h = (cmat(params, l.Wh, d, d) * h_prev +
                 cmat(params, l.Wx, d, d) *
                     cmat(params, l.G, V, d).row(prev).transpose() +
                 cvec(params, l.bh, d))
                    .array()
                    .tanh()
                    .matrix();
  const Vec logits = cmat(params, l.Wo, V, d) * h + cvec(params, l.bo, V);
  return std::vector<double>(logits.data(), logits.data() + V);
}

Generator::State RecurrentGenerator::advance(std::span<const double> params,
                                             const State &state,
                                             TokenId token) const {
  check_target(std::span<const TokenId>(&token, 1));
  const Layout l = layout();
  const std::size_t V = dims_.vocab_size, d = dims_.dim;
  const Vec h_prev = ConstVec(state.data(), d);
  const auto prev = static_cast<TokenId>(state[d]);
  const Vec h = (cmat(params, l.Wh, d, d) * h_prev +
                 cmat(params, l.Wx, d, d) *
                     cmat(params, l.G, V, d).row(prev).transpose() +
                 cvec(params, l.bh, d))
                    .array()
                    .tanh()
                    .matrix();
  State s(h.data(), h.data() + d);
  s.push_back(static_cast<double>(token));
  return s;
}

// ---------------------------------------------------------------------------

std::vector<double> gradient(const Objective &objective,
                             std::span<const double> params, double *value) {
  std::vector<double> g(params.size(), 0.0);
  const double v = objective(params, g);
  if (!std::isfinite(v)) throw NumericError("objective is not finite");
  for (double x : g)
    if (!std::isfinite(x)) throw NumericError("gradient is not finite");
  if (value) *value = v;
  return g;
}

}  // namespace pkgc
