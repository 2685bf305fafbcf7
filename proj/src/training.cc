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

#include "pkgc/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "pkgc/errors.h"
#include "pkgc/metrics.h"

namespace pkgc {

// ---------------------------------------------------------------------------
// Model

std::string ModelConfig::hash(std::size_t vocab_size) const {
  std::ostringstream os;
  os << "dim=" << dim << ";hidden=" << hidden << ";vocab=" << vocab_size
     << ";share=" << share_pair_params << ";indep=" << independent_latents
     << ";max_seq=" << composer.max_seq_len
     << ";floor=" << composer.context_floor
     << ";usep=" << composer.sep_between_utterances;
  return hash_user_key(os.str());
}

Model make_model(const ModelConfig &config, Vocab vocab) {
  Model m;
  m.config = config;
  m.vocab = std::move(vocab);
  ModelDims dims{m.vocab.size(), config.dim, config.hidden};
  m.latents.prior = make_reference_scorer(dims);
  m.latents.posterior = make_reference_scorer(dims);
  m.latents.auxiliary = make_reference_scorer(dims);
  m.latents.composer = config.composer;
  m.latents.composer.independent_latents = config.independent_latents;
  m.latents.share_pair_params = config.share_pair_params;
  m.generator = std::make_shared<const RecurrentGenerator>(dims);
  return m;
}

ParamSet zero_like(const Model &model) {
  ParamSet p;
  p.theta.assign(model.latents.num_params(ParamGroup::kTheta), 0.0);
  p.phi.assign(model.latents.num_params(ParamGroup::kPhi), 0.0);
  p.psi.assign(model.latents.num_params(ParamGroup::kPsi), 0.0);
  p.gen.assign(model.generator->num_params(), 0.0);
  return p;
}

ParamSet init_params(const Model &model, Rng &rng) {
  ParamSet p = zero_like(model);
  init_uniform(p.theta, rng);
  init_uniform(p.phi, rng);
  init_uniform(p.psi, rng);
  init_uniform(p.gen, rng);
  return p;
}

// ---------------------------------------------------------------------------
// Data

std::vector<PreparedCase> prepare_cases(const Vocab &vocab,
                                        const std::vector<DialogueCase> &cases,
                                        const MemoryRepository &repo,
                                        const std::vector<TruthRecord> *truth) {
  std::unordered_map<std::string, const TruthRecord *> by_id;
  if (truth)
    for (const auto &t : *truth) by_id[t.id] = &t;
  std::vector<PreparedCase> out;
  out.reserve(cases.size());
  for (const auto &c : cases) {
    validate_case(c);
    auto it = repo.entries.find(c.user_key);
    if (it == repo.entries.end() || it->second.empty())
      throw DataError("case " + c.id + ": no memory for user " + c.user_key);
    const MemorySet mem{it->second};
    PreparedCase p;
    p.id = c.id;
    p.labels = pseudo_labels(c, mem);
    p.enc = encode_case(vocab, c, mem);
    p.reference = c.response;
    if (truth) {
      auto t = by_id.find(c.id);
      if (t == by_id.end())
        throw DataError("case " + c.id + ": no ground-truth record");
      if (t->second->zp >= mem.size() || t->second->zk >= c.knowledge.size())
        throw DataError("case " + c.id + ": ground truth out of range");
      p.truth = LatentAssignment{t->second->zp, t->second->zk};
    }
    out.push_back(std::move(p));
  }
  return out;
}

TokenIds generation_target(const EncodedCase &c) {
  TokenIds t = c.response;
  t.push_back(kEos);
  return t;
}

Batch make_batch(std::span<const PreparedCase> cases) {
  Batch b;
  for (const auto &c : cases) b.push_back(&c);
  return b;
}

// ---------------------------------------------------------------------------
// Per-case objectives

namespace {

// d/dlogits of log softmax(logits)[label], scaled.
std::vector<double> label_grad(const LatentEval &ev, std::size_t label,
                               double scale = 1.0) {
  std::vector<double> d(ev.logits.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = scale * ((i == label ? 1.0 : 0.0) - ev.dist[i]);
  return d;
}

double log_prob(const LatentEval &ev, std::size_t label) {
  return log_softmax(ev.logits)[label];
}

GenerationCondition condition_for(const EncodedCase &c, std::size_t zp,
                                  std::size_t zk) {
  return GenerationCondition{c.context, c.memory[zp], c.knowledge[zk]};
}

}  // namespace

WarmupTerms warmup_objective(const Model &model, const ParamSet &params,
                             const PreparedCase &c, bool include_generator,
                             ParamSet *grad) {
  const auto in = latent_inputs(c.enc);
  const std::size_t pb = c.labels.p_bar, kb = c.labels.k_bar;
  const LatentModels &m = model.latents;
  WarmupTerms terms;

  struct Item {
    LatentEval ev;
    std::size_t label;
    const Params *group;
    Params *group_grad;
  };
  std::vector<Item> items;
  items.push_back({prior_zp(m, params.theta, in), pb, &params.theta,
                   grad ? &grad->theta : nullptr});
  items.push_back({prior_zk(m, params.theta, in, pb), kb, &params.theta,
                   grad ? &grad->theta : nullptr});
  items.push_back({post_zp(m, params.phi, in), pb, &params.phi,
                   grad ? &grad->phi : nullptr});
  items.push_back({post_zk(m, params.phi, in, pb), kb, &params.phi,
                   grad ? &grad->phi : nullptr});
  items.push_back({aux_zp(m, params.psi, in, kb), pb, &params.psi,
                   grad ? &grad->psi : nullptr});
  for (const auto &it : items) {
    terms.latent_loglik += log_prob(it.ev, it.label);
    if (it.group_grad)
      backprop(m, it.ev, *it.group, label_grad(it.ev, it.label),
               *it.group_grad);
  }

  if (include_generator) {
    const TokenIds target = generation_target(c.enc);
    const auto cond = condition_for(c.enc, pb, kb);
    terms.gen_loglik =
        grad ? model.generator->log_likelihood_gradient(params.gen, cond,
                                                         target, 1.0, grad->gen)
             : model.generator->log_likelihood(params.gen, cond, target);
  }
  return terms;
}

LatentTables latent_tables(const Model &model, const ParamSet &params,
                           const PreparedCase &c) {
  const auto in = latent_inputs(c.enc);
  const LatentModels &m = model.latents;
  LatentTables t;
  t.q_zp = post_zp(m, params.phi, in).dist;
  t.p_zp = prior_zp(m, params.theta, in).dist;
  t.q_zk = post_zk_table(m, params.phi, in);
  t.p_zk = prior_zk_table(m, params.theta, in);
  const TokenIds target = generation_target(c.enc);
  t.loglik.assign(c.enc.memory.size(),
                  std::vector<double>(c.enc.knowledge.size(), 0.0));
  for (std::size_t zp = 0; zp < c.enc.memory.size(); ++zp)
    for (std::size_t zk = 0; zk < c.enc.knowledge.size(); ++zk)
      t.loglik[zp][zk] = model.generator->log_likelihood(
          params.gen, condition_for(c.enc, zp, zk), target);
  return t;
}

ElboTerms elbo_from_tables(const LatentTables &t, KlFn kl_fn) {
  ElboTerms e;
  e.kl_zp = kl_fn(t.q_zp, t.p_zp);
  for (std::size_t zp = 0; zp < t.q_zp.size(); ++zp) {
    const double w = t.q_zp[zp];
    if (w == 0.0) continue;
    e.kl_zk += w * kl_fn(t.q_zk[zp], t.p_zk[zp]);
    for (std::size_t zk = 0; zk < t.q_zk[zp].size(); ++zk)
      e.reconstruction += w * t.q_zk[zp][zk] * t.loglik[zp][zk];
  }
  return e;
}

ElboTerms elbo(const Model &model, const ParamSet &params,
               const PreparedCase &c, ElboMode mode, double u_zp,
               double u_zk) {
  return theta_objective(model, params, c, mode, u_zp, u_zk, nullptr);
}

ElboTerms theta_objective(const Model &model, const ParamSet &params,
                          const PreparedCase &c, ElboMode mode, double u_zp,
                          double u_zk, ParamSet *grad) {
  const auto in = latent_inputs(c.enc);
  const LatentModels &m = model.latents;
  const std::size_t P = c.enc.memory.size();

  const LatentEval q_zp = post_zp(m, params.phi, in);
  const LatentEval p_zp = prior_zp(m, params.theta, in);
  std::vector<CategoricalDistribution> q_zk = post_zk_table(m, params.phi, in);
  std::vector<LatentEval> p_zk;
  for (std::size_t zp = 0; zp < P; ++zp)
    p_zk.push_back(prior_zk(m, params.theta, in, zp));

  ElboTerms e;
  e.kl_zp = kl(q_zp.dist, p_zp.dist);
  for (std::size_t zp = 0; zp < P; ++zp)
    if (q_zp.dist[zp] > 0.0)
      e.kl_zk += q_zp.dist[zp] * kl(q_zk[zp], p_zk[zp].dist);

  if (grad) {
    // d(-KL(q||softmax(l)))/dl = q - p.
    std::vector<double> d(P);
    for (std::size_t i = 0; i < P; ++i) d[i] = q_zp.dist[i] - p_zp.dist[i];
    backprop(m, p_zp, params.theta, d, grad->theta);
    for (std::size_t zp = 0; zp < P; ++zp) {
      const double w = q_zp.dist[zp];
      if (w == 0.0) continue;
      std::vector<double> dk(q_zk[zp].size());
      for (std::size_t k = 0; k < dk.size(); ++k)
        dk[k] = w * (q_zk[zp][k] - p_zk[zp].dist[k]);
      backprop(m, p_zk[zp], params.theta, dk, grad->theta);
    }
  }

  const TokenIds target = generation_target(c.enc);
  auto recon = [&](std::size_t zp, std::size_t zk, double weight) {
    const auto cond = condition_for(c.enc, zp, zk);
    if (grad)
      return model.generator->log_likelihood_gradient(params.gen, cond, target,
                                                      weight, grad->gen);
    return model.generator->log_likelihood(params.gen, cond, target);
  };
  if (mode == ElboMode::kEnumerate) {
    for (std::size_t zp = 0; zp < P; ++zp) {
      if (q_zp.dist[zp] == 0.0) continue;
      for (std::size_t zk = 0; zk < q_zk[zp].size(); ++zk) {
        const double w = q_zp.dist[zp] * q_zk[zp][zk];
        if (w == 0.0) continue;
        e.reconstruction += w * recon(zp, zk, w);
      }
    }
  } else {
    const std::size_t zp = sample_with_uniform(q_zp.dist, u_zp);
    const std::size_t zk = sample_with_uniform(q_zk[zp], u_zk);
    e.reconstruction = recon(zp, zk, 1.0);
  }
  return e;
}

DualRewards dual_phi_objective(const Model &model, const ParamSet &params,
                               const PreparedCase &c, std::size_t zp,
                               std::size_t zk, double baseline,
                               ParamSet *grad) {
  const auto in = latent_inputs(c.enc);
  const LatentEval aux = aux_zp(model.latents, params.psi, in, zk);
  const LatentEval post = post_zk(model.latents, params.phi, in, zp);
  DualRewards r;
  r.zp = zp;
  r.zk = zk;
  r.reward = aux.dist[zp];
  const double adv = r.reward - baseline;
  r.surrogate = adv * log_prob(post, zk);
  if (grad)
    backprop(model.latents, post, params.phi, label_grad(post, zk, adv),
             grad->phi);
  return r;
}

DualRewards dual_psi_objective(const Model &model, const ParamSet &params,
                               const PreparedCase &c, std::size_t zp,
                               double baseline, ParamSet *grad) {
  const auto in = latent_inputs(c.enc);
  const std::size_t kb = c.labels.k_bar;
  const LatentEval post = post_zk(model.latents, params.phi, in, zp);
  const LatentEval aux = aux_zp(model.latents, params.psi, in, kb);
  DualRewards r;
  r.zp = zp;
  r.zk = kb;
  r.reward = post.dist[kb];
  const double adv = r.reward - baseline;
  r.surrogate = adv * log_prob(aux, zp);
  if (grad)
    backprop(model.latents, aux, params.psi, label_grad(aux, zp, adv),
             grad->psi);
  return r;
}

double distill_objective(const Model &model, const ParamSet &params,
                         const PreparedCase &c, double alpha,
                         double temperature, ParamSet *grad) {
  if (!(temperature > 0.0))
    throw ArgumentError("distillation temperature must be > 0");
  const auto in = latent_inputs(c.enc);
  const LatentEval teacher =
      aux_zp(model.latents, params.psi, in, c.labels.k_bar);
  const LatentEval student = post_zp(model.latents, params.phi, in);
  const CategoricalDistribution target = temper(teacher.dist, temperature);

  std::vector<double> scaled(student.logits.size());
  for (std::size_t i = 0; i < scaled.size(); ++i)
    scaled[i] = student.logits[i] / temperature;
  const std::vector<double> log_qt = log_softmax(scaled);
  const std::vector<double> log_q = log_softmax(student.logits);

  double neg_kl = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i)
    if (target[i] > 0.0)
      neg_kl -= target[i] * (std::log(target[i]) - log_qt[i]);
  const std::size_t pb = c.labels.p_bar;
  const double value = neg_kl + alpha * log_q[pb];

  if (grad) {
    std::vector<double> d(scaled.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double qt = std::exp(log_qt[i]);
      d[i] = (target[i] - qt) / temperature +
             alpha * ((i == pb ? 1.0 : 0.0) - student.dist[i]);
    }
    backprop(model.latents, student, params.phi, d, grad->phi);
  }
  return value;
}

// ---------------------------------------------------------------------------
// Configuration and state

TrainingConfig TrainingConfig::desk() {
  TrainingConfig c;
  c.warmup_steps = 500;
  c.dual_steps = 300;
  c.batch_size = 8;
  c.warmup_lr = 1e-2;
  c.dual_lr = 1e-3;
  return c;
}

std::vector<std::string> TrainingConfig::problems() const {
  std::vector<std::string> p;
  if (batch_size == 0) p.push_back("train.batch_size must be >= 1");
  if (!(warmup_lr >= 0.0)) p.push_back("train.warmup_lr must be >= 0");
  if (!(dual_lr >= 0.0)) p.push_back("train.dual_lr must be >= 0");
  if (!(min_lr >= 0.0)) p.push_back("train.min_lr must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0))
    p.push_back("train.adam_beta1 must be in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    p.push_back("train.adam_beta2 must be in [0, 1)");
  if (!(grad_clip > 0.0)) p.push_back("train.grad_clip must be > 0");
  if (!(alpha >= 0.0)) p.push_back("train.alpha must be >= 0");
  if (!(temperature > 0.0)) p.push_back("train.temperature must be > 0");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0))
    p.push_back("train.baseline_decay must be in [0, 1)");
  if (probe_every == 0) p.push_back("train.probe_every must be >= 1");
  if (probe_cases == 0) p.push_back("train.probe_cases must be >= 1");
  return p;
}

TrainState init_state(const Model &model, std::uint64_t seed) {
  TrainState s;
  Rng init_rng = Rng::derive(seed, 0);
  s.params = init_params(model, init_rng);
  s.adam_theta = AdamState(s.params.theta.size());
  s.adam_phi = AdamState(s.params.phi.size());
  s.adam_psi = AdamState(s.params.psi.size());
  s.adam_gen = AdamState(s.params.gen.size());
  s.rng = Rng::derive(seed, 1);
  return s;
}

// ---------------------------------------------------------------------------
// Steps

double warmup_lr_at(const TrainingConfig &cfg, std::uint64_t step) {
  return cosine_lr(cfg.warmup_lr, step, cfg.warmup_steps, cfg.min_lr);
}

double dual_lr_at(const TrainingConfig &cfg, std::uint64_t step) {
  return cosine_lr(cfg.dual_lr, step, cfg.dual_steps, cfg.min_lr);
}

namespace {

enum GroupMask : unsigned {
  kTheta = 1,
  kPhi = 2,
  kPsi = 4,
  kGen = 8,
};

ParamSet sized_grad(const ParamSet &like, unsigned mask) {
  ParamSet g;
  if (mask & kTheta) g.theta.assign(like.theta.size(), 0.0);
  if (mask & kPhi) g.phi.assign(like.phi.size(), 0.0);
  if (mask & kPsi) g.psi.assign(like.psi.size(), 0.0);
  if (mask & kGen) g.gen.assign(like.gen.size(), 0.0);
  return g;
}

// Runs kernel(i, grad_i) for every batch entry, reduces the per-case
// gradients in case order and averages them.
template <typename Kernel>
ParamSet batch_gradient(const TrainingConfig &cfg, const ParamSet &like,
                        unsigned mask, std::size_t n, Kernel &&kernel) {
  std::vector<ParamSet> parts(n);
  for_each_index(cfg.execution, n, [&](std::size_t i) {
    parts[i] = sized_grad(like, mask);
    kernel(i, parts[i]);
  });
  ParamSet total = sized_grad(like, mask);
  auto reduce = [&](Params ParamSet::*field) {
    Params &out = total.*field;
    if (out.empty()) return;
    for (const auto &p : parts) {
      const Params &src = p.*field;
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += src[j];
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (double &x : out) x *= inv;
  };
  reduce(&ParamSet::theta);
  reduce(&ParamSet::phi);
  reduce(&ParamSet::psi);
  reduce(&ParamSet::gen);
  return total;
}

double apply_update(const TrainingConfig &cfg, Params &params, Params &grad,
                    AdamState &adam, double lr) {
  if (grad.empty()) return 0.0;
  clip_by_global_norm(grad, cfg.grad_clip);
  const AdamOptions opts{cfg.adam_beta1, cfg.adam_beta2};
  adam_ascent(params, grad, lr, adam, opts);
  return l2_norm(grad);
}

void require_batch(const Batch &batch) {
  if (batch.empty()) throw ArgumentError("empty batch");
}

void require_warm(const TrainState &state, const char *what) {
  if (!state.warmed_up)
    throw StateError(std::string(what) + " called before warm-up completed");
}

}  // namespace

StepStats warmup_step(const Model &model, const TrainingConfig &cfg,
                      TrainState &state, const Batch &batch) {
  require_batch(batch);
  const std::size_t n = batch.size();
  const unsigned mask =
      kTheta | kPhi | kPsi | (cfg.warmup_generator ? kGen : 0u);
  std::vector<WarmupTerms> terms(n);
  ParamSet g = batch_gradient(cfg, state.params, mask, n,
                              [&](std::size_t i, ParamSet &gi) {
                                terms[i] = warmup_objective(
                                    model, state.params, *batch[i],
                                    cfg.warmup_generator, &gi);
                              });
  const double lr = warmup_lr_at(cfg, state.warmup_step);
  StepStats s;
  s.grad_norm = std::max(
      {apply_update(cfg, state.params.theta, g.theta, state.adam_theta, lr),
       apply_update(cfg, state.params.phi, g.phi, state.adam_phi, lr),
       apply_update(cfg, state.params.psi, g.psi, state.adam_psi, lr),
       apply_update(cfg, state.params.gen, g.gen, state.adam_gen, lr)});
  double ll = 0.0;
  for (const auto &t : terms) ll += t.latent_loglik;
  s.loss = -ll / static_cast<double>(n);
  ++state.warmup_step;
  return s;
}

StepStats dual_step(const Model &model, const TrainingConfig &cfg,
                    TrainState &state, const Batch &batch) {
  require_batch(batch);
  require_warm(state, "dual_step");
  const std::size_t n = batch.size();
  std::vector<std::array<double, 3>> u(n);
  for (auto &x : u) x = {state.rng.uniform(), state.rng.uniform(),
                         state.rng.uniform()};
  const double lr = dual_lr_at(cfg, state.dual_step);
  StepStats s;

  // Primal task: memory -> knowledge, rewarded by the auxiliary model.
  const double b1 = cfg.reward_baseline ? state.baseline_re1 : 0.0;
  std::vector<DualRewards> r1(n);
  ParamSet g1 = batch_gradient(
      cfg, state.params, kPhi, n, [&](std::size_t i, ParamSet &gi) {
        const auto in = latent_inputs(batch[i]->enc);
        const auto q_zp = post_zp(model.latents, state.params.phi, in);
        const std::size_t zp = sample_with_uniform(q_zp.dist, u[i][0]);
        const auto q_zk = post_zk(model.latents, state.params.phi, in, zp);
        const std::size_t zk = sample_with_uniform(q_zk.dist, u[i][1]);
        r1[i] = dual_phi_objective(model, state.params, *batch[i], zp, zk, b1,
                                   &gi);
      });
  const double n1 = apply_update(cfg, state.params.phi, g1.phi,
                                 state.adam_phi, lr);

  // Dual task: knowledge -> memory, rewarded by the (updated) posterior.
  const double b2 = cfg.reward_baseline ? state.baseline_re2 : 0.0;
  std::vector<DualRewards> r2(n);
  ParamSet g2 = batch_gradient(
      cfg, state.params, kPsi, n, [&](std::size_t i, ParamSet &gi) {
        const auto in = latent_inputs(batch[i]->enc);
        const auto pi = aux_zp(model.latents, state.params.psi, in,
                               batch[i]->labels.k_bar);
        const std::size_t zp = sample_with_uniform(pi.dist, u[i][2]);
        r2[i] = dual_psi_objective(model, state.params, *batch[i], zp, b2, &gi);
      });
  const double n2 = apply_update(cfg, state.params.psi, g2.psi,
                                 state.adam_psi, lr);

  for (std::size_t i = 0; i < n; ++i) {
    s.re1 += r1[i].reward;
    s.re2 += r2[i].reward;
  }
  s.re1 /= static_cast<double>(n);
  s.re2 /= static_cast<double>(n);
  if (cfg.reward_baseline) {
    state.baseline_re1 =
        cfg.baseline_decay * state.baseline_re1 + (1 - cfg.baseline_decay) * s.re1;
    state.baseline_re2 =
        cfg.baseline_decay * state.baseline_re2 + (1 - cfg.baseline_decay) * s.re2;
  }
  s.grad_norm = std::max(n1, n2);
  return s;
}

StepStats theta_step(const Model &model, const TrainingConfig &cfg,
                     TrainState &state, const Batch &batch) {
  require_batch(batch);
  require_warm(state, "theta_step");
  const std::size_t n = batch.size();
  std::vector<std::array<double, 2>> u(n);
  for (auto &x : u) x = {state.rng.uniform(), state.rng.uniform()};
  std::vector<ElboTerms> terms(n);
  ParamSet g = batch_gradient(
      cfg, state.params, kTheta | kGen, n, [&](std::size_t i, ParamSet &gi) {
        terms[i] = theta_objective(model, state.params, *batch[i],
                                   cfg.elbo_mode, u[i][0], u[i][1], &gi);
      });
  const double lr = dual_lr_at(cfg, state.dual_step);
  StepStats s;
  s.grad_norm = std::max(
      apply_update(cfg, state.params.theta, g.theta, state.adam_theta, lr),
      apply_update(cfg, state.params.gen, g.gen, state.adam_gen, lr));
  for (const auto &t : terms) s.elbo += t.value();
  s.elbo /= static_cast<double>(n);
  s.loss = -s.elbo;
  return s;
}

StepStats distill_step(const Model &model, const TrainingConfig &cfg,
                       TrainState &state, const Batch &batch) {
  require_batch(batch);
  require_warm(state, "distill_step");
  const std::size_t n = batch.size();
  std::vector<double> values(n);
  ParamSet g = batch_gradient(
      cfg, state.params, kPhi, n, [&](std::size_t i, ParamSet &gi) {
        values[i] = distill_objective(model, state.params, *batch[i], cfg.alpha,
                                      cfg.temperature, &gi);
      });
  const double lr = dual_lr_at(cfg, state.dual_step);
  StepStats s;
  s.grad_norm =
      apply_update(cfg, state.params.phi, g.phi, state.adam_phi, lr);
  for (double v : values) s.loss -= v;
  s.loss /= static_cast<double>(n);
  return s;
}

// ---------------------------------------------------------------------------
// Probes and the loop

std::map<std::string, double> probe_recall(const Model &model,
                                           const ParamSet &params,
                                           std::span<const PreparedCase> cases,
                                           Execution ex) {
  static const char *kNames[] = {"prior_zp", "prior_zk", "post_zp", "post_zk",
                                 "aux_zp"};
  if (cases.empty()) throw ArgumentError("probe_recall: no cases");
  std::vector<std::array<int, 5>> hits(cases.size());
  for_each_index(ex, cases.size(), [&](std::size_t i) {
    const PreparedCase &c = cases[i];
    const auto in = latent_inputs(c.enc);
    const std::size_t zp = c.truth ? c.truth->zp : c.labels.p_bar;
    const std::size_t zk = c.truth ? c.truth->zk : c.labels.k_bar;
    const LatentModels &m = model.latents;
    hits[i] = {
        prior_zp(m, params.theta, in).dist.argmax() == zp,
        prior_zk(m, params.theta, in, zp).dist.argmax() == zk,
        post_zp(m, params.phi, in).dist.argmax() == zp,
        post_zk(m, params.phi, in, zp).dist.argmax() == zk,
        aux_zp(m, params.psi, in, zk).dist.argmax() == zp,
    };
  });
  std::map<std::string, double> out;
  for (std::size_t k = 0; k < 5; ++k) {
    double h = 0.0;
    for (const auto &row : hits) h += row[k];
    out[kNames[k]] = h / static_cast<double>(cases.size());
  }
  return out;
}

namespace {

nlohmann::ordered_json log_record(std::uint64_t step, const char *phase,
                                  const StepStats &s, bool dual,
                                  const std::map<std::string, double> *probe) {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["phase"] = phase;
  j["loss"] = s.loss;
  j["elbo"] = dual ? nlohmann::ordered_json(s.elbo) : nullptr;
  j["re1"] = dual ? nlohmann::ordered_json(s.re1) : nullptr;
  j["re2"] = dual ? nlohmann::ordered_json(s.re2) : nullptr;
  if (probe) {
    nlohmann::ordered_json p = nlohmann::ordered_json::object();
    for (const auto &[k, v] : *probe) p[k] = v;
    j["recall_probe"] = p;
  } else {
    j["recall_probe"] = nullptr;
  }
  return j;
}

double probe_score(const std::map<std::string, double> &probe) {
  double s = 0.0;
  for (const auto &[k, v] : probe) s += v;
  return s / static_cast<double>(probe.size());
}

}  // namespace

void train(const Model &model, const TrainingConfig &cfg,
           std::span<const PreparedCase> cases, TrainState &state,
           const TrainOptions &opts) {
  if (cases.empty()) throw DataError("train: empty corpus");
  if (const auto p = cfg.problems(); !p.empty()) throw ConfigError(p.front());
  const auto probe_set =
      cases.first(std::min<std::size_t>(cfg.probe_cases, cases.size()));

  auto next_batch = [&]() {
    Batch b;
    for (std::size_t i = 0; i < cfg.batch_size; ++i)
      b.push_back(&cases[state.rng.below(cases.size())]);
    return b;
  };
  auto emit = [&](const nlohmann::ordered_json &j) {
    if (opts.log) opts.log(j);
  };
  auto maybe_checkpoint = [&]() {
    if (opts.checkpoint && cfg.checkpoint_every &&
        state.global_step() % cfg.checkpoint_every == 0)
      opts.checkpoint(state);
  };

  if (cfg.warmup_steps == 0) state.warmed_up = true;
  while (state.warmup_step < cfg.warmup_steps) {
    const Batch batch = next_batch();
    const StepStats s = warmup_step(model, cfg, state, batch);
    if (state.warmup_step == cfg.warmup_steps) state.warmed_up = true;
    std::map<std::string, double> probe;
    const bool do_probe = state.warmup_step % cfg.probe_every == 0 ||
                          state.warmup_step == cfg.warmup_steps;
    if (do_probe) probe = probe_recall(model, state.params, probe_set,
                                       cfg.execution);
    emit(log_record(state.global_step(), "warmup", s, false,
                    do_probe ? &probe : nullptr));
    maybe_checkpoint();
  }
  if (opts.warmup_only) return;

  while (!state.stopped_early && state.dual_step < cfg.dual_steps) {
    const Batch batch = next_batch();
    const StepStats d = dual_step(model, cfg, state, batch);
    const StepStats t = theta_step(model, cfg, state, batch);
    const StepStats k = distill_step(model, cfg, state, batch);
    ++state.dual_step;

    StepStats s;
    s.loss = k.loss;
    s.elbo = t.elbo;
    s.re1 = d.re1;
    s.re2 = d.re2;
    std::map<std::string, double> probe;
    const bool do_probe = state.dual_step % cfg.probe_every == 0 ||
                          state.dual_step == cfg.dual_steps;
    if (do_probe) {
      probe = probe_recall(model, state.params, probe_set, cfg.execution);
      const double score = probe_score(probe);
      if (score > state.best_probe) {
        state.best_probe = score;
        state.probes_since_best = 0;
      } else if (++state.probes_since_best >= cfg.early_stop_patience &&
                 cfg.early_stop_patience > 0) {
        state.stopped_early = true;
      }
    }
    emit(log_record(state.global_step(), "dual", s, true,
                    do_probe ? &probe : nullptr));
    maybe_checkpoint();
  }
}

}  // namespace pkgc
