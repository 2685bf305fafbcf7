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

// Learning procedure for the latent selection models.
//
//   1. Warm-up: maximum likelihood of the pseudo labels (P_bar, K_bar)
//      under all five distributions.
//   2. Loop, one batch per iteration:
//        dual_step    REINFORCE on q_phi(Zk|.) rewarded by pi_psi recovering
//                     the sampled memory, then on pi_psi rewarded by q_phi
//                     predicting K_bar;
//        theta_step   ELBO ascent for the priors (KL terms) and the
//                     generator (reconstruction term);
//        distill_step pulls q_phi(Zp|C,R) towards pi_psi(Zp|C,R,K_bar) at
//                     temperature T, plus alpha * log q_phi(P_bar).
//
// Per-case objectives below are the data-parallel kernels. Each writes
// gradients (ascent direction) into caller-owned buffers; step functions
// run them over a batch with for_each_index and reduce in case order.

#ifndef PKGC_TRAINING_H_
#define PKGC_TRAINING_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pkgc/corpus.h"
#include "pkgc/latent.h"
#include "pkgc/neural.h"
#include "pkgc/optimizer.h"
#include "pkgc/parallel.h"
#include "pkgc/rng.h"
#include "pkgc/vocab.h"

namespace pkgc {

// ---------------------------------------------------------------------------
// Model

struct ModelConfig {
  std::size_t dim = 32;
  std::size_t hidden = 32;
  std::size_t max_vocab = 1000;
  bool share_pair_params = true;
  bool independent_latents = false;
  ComposerOptions composer;

  // Hash over every field that changes parameter shapes or semantics.
  std::string hash(std::size_t vocab_size) const;
};

struct Model {
  ModelConfig config;
  Vocab vocab;
  LatentModels latents;
  std::shared_ptr<const Generator> generator;

  std::string config_hash() const { return config.hash(vocab.size()); }
};

// Reference encoder/head/generator sized by config and vocab.
Model make_model(const ModelConfig &config, Vocab vocab);

struct ParamSet {
  Params theta;  // prior scorer(s)
  Params phi;    // posterior scorer(s)
  Params psi;    // auxiliary scorer
  Params gen;    // generator

  bool operator==(const ParamSet &) const = default;
};

ParamSet init_params(const Model &model, Rng &rng);
// All four groups zero-filled at the model's sizes.
ParamSet zero_like(const Model &model);

// ---------------------------------------------------------------------------
// Data

struct PreparedCase {
  std::string id;
  EncodedCase enc;
  PseudoLabels labels;
  std::optional<LatentAssignment> truth;
  Tokens reference;  // response words, for text metrics only
};

// Retrieves every case's memory, tags pseudo labels and encodes tokens.
// A case whose user is missing from the repository is a DataError naming
// the case id. truth, when given, is matched by id.
std::vector<PreparedCase> prepare_cases(
    const Vocab &vocab, const std::vector<DialogueCase> &cases,
    const MemoryRepository &repo,
    const std::vector<TruthRecord> *truth = nullptr);

// Response tokens followed by [EOS].
TokenIds generation_target(const EncodedCase &c);

using Batch = std::vector<const PreparedCase *>;
Batch make_batch(std::span<const PreparedCase> cases);

// ---------------------------------------------------------------------------
// Per-case objectives

struct WarmupTerms {
  double latent_loglik = 0.0;  // sum of the five pseudo-label log-probs
  double gen_loglik = 0.0;     // log g(R | C, P_bar, K_bar), if requested
};

// Ascent gradient of latent_loglik (+ gen_loglik when include_generator)
// into grad (theta, phi, psi, and gen when included).
WarmupTerms warmup_objective(const Model &model, const ParamSet &params,
                             const PreparedCase &c, bool include_generator,
                             ParamSet *grad);

enum class ElboMode { kSample, kEnumerate };

// Every quantity the ELBO needs, enumerated over the |P| x |K| grid.
struct LatentTables {
  CategoricalDistribution q_zp, p_zp;
  std::vector<CategoricalDistribution> q_zk, p_zk;  // one row per zp
  std::vector<std::vector<double>> loglik;          // [zp][zk], log g(R|.)
};

LatentTables latent_tables(const Model &model, const ParamSet &params,
                           const PreparedCase &c);

struct ElboTerms {
  double reconstruction = 0.0;  // E_q log g(R | C, Zp, Zk)
  double kl_zk = 0.0;           // E_q(Zp) KL(q(Zk|Zp) || p(Zk|Zp))
  double kl_zp = 0.0;           // KL(q(Zp) || p(Zp))
  double value() const { return reconstruction - kl_zk - kl_zp; }
};

// Exact expectations over the tables.
ElboTerms elbo_from_tables(const LatentTables &t, KlFn kl_fn = kl);

// kEnumerate: exact. kSample: the reconstruction term uses one draw
// (zp ~ q(Zp), zk ~ q(Zk|zp)) taken from the two uniforms; KL terms are
// exact in both modes.
ElboTerms elbo(const Model &model, const ParamSet &params,
               const PreparedCase &c, ElboMode mode, double u_zp = 0.0,
               double u_zk = 0.0);

// ELBO with ascent gradients: KL terms into grad->theta (q held fixed) and
// the reconstruction term into grad->gen.
ElboTerms theta_objective(const Model &model, const ParamSet &params,
                          const PreparedCase &c, ElboMode mode, double u_zp,
                          double u_zk, ParamSet *grad);

struct DualRewards {
  std::size_t zp = 0;  // sampled memory
  std::size_t zk = 0;  // sampled knowledge (primal task only)
  double reward = 0.0;
  double surrogate = 0.0;  // (reward - baseline) * log-prob of the sample
};

// Primal task for fixed samples: Re1 = pi_psi(Zp = zp | C, R, zk), grad->phi
// += (Re1 - baseline) * d log q_phi(Zk = zk | C, R, zp).
DualRewards dual_phi_objective(const Model &model, const ParamSet &params,
                               const PreparedCase &c, std::size_t zp,
                               std::size_t zk, double baseline,
                               ParamSet *grad);

// Dual task for a fixed sample zp: Re2 = q_phi(Zk = K_bar | C, R, zp),
// grad->psi += (Re2 - baseline) * d log pi_psi(Zp = zp | C, R, K_bar).
DualRewards dual_psi_objective(const Model &model, const ParamSet &params,
                               const PreparedCase &c, std::size_t zp,
                               double baseline, ParamSet *grad);

// L_dis = -KL(pi^T(Zp|C,R,K_bar) || q^T(Zp|C,R)) + alpha log q(P_bar|C,R),
// ascent gradient into grad->phi only.
double distill_objective(const Model &model, const ParamSet &params,
                         const PreparedCase &c, double alpha,
                         double temperature, ParamSet *grad);

// ---------------------------------------------------------------------------
// Configuration and state

struct TrainingConfig {
  // Full-scale schedule. desk() gives the small-scale overrides.
  std::size_t warmup_steps = 5000;
  std::size_t dual_steps = 1000;
  std::size_t batch_size = 16;
  double warmup_lr = 1e-5;
  double dual_lr = 1e-6;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double grad_clip = 2.0;
  double min_lr = 0.0;
  double alpha = 0.5;
  double temperature = 2.0;
  std::uint64_t seed = 0;
  ElboMode elbo_mode = ElboMode::kSample;
  bool warmup_generator = true;
  bool reward_baseline = false;
  double baseline_decay = 0.9;
  std::size_t probe_every = 25;
  std::size_t probe_cases = 200;
  std::size_t early_stop_patience = 5;  // probes; 0 disables
  std::size_t checkpoint_every = 0;     // steps; 0 disables
  Execution execution = Execution::kParallel;

  static TrainingConfig desk();
  // Every violated constraint, one message each.
  std::vector<std::string> problems() const;
};

struct TrainState {
  ParamSet params;
  AdamState adam_theta, adam_phi, adam_psi, adam_gen;
  std::uint64_t warmup_step = 0;  // completed warm-up steps
  std::uint64_t dual_step = 0;    // completed loop iterations
  bool warmed_up = false;
  bool stopped_early = false;
  double baseline_re1 = 0.0;
  double baseline_re2 = 0.0;
  double best_probe = -1.0;
  std::uint64_t probes_since_best = 0;
  Rng rng;

  std::uint64_t global_step() const { return warmup_step + dual_step; }
  bool operator==(const TrainState &) const = default;
};

TrainState init_state(const Model &model, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Steps

struct StepStats {
  double loss = 0.0;
  double elbo = 0.0;
  double re1 = 0.0;
  double re2 = 0.0;
  double grad_norm = 0.0;  // largest post-clip norm over updated groups
};

StepStats warmup_step(const Model &model, const TrainingConfig &cfg,
                      TrainState &state, const Batch &batch);
StepStats dual_step(const Model &model, const TrainingConfig &cfg,
                    TrainState &state, const Batch &batch);
StepStats theta_step(const Model &model, const TrainingConfig &cfg,
                     TrainState &state, const Batch &batch);
StepStats distill_step(const Model &model, const TrainingConfig &cfg,
                       TrainState &state, const Batch &batch);

// Learning rate the next warm-up / loop step will use.
double warmup_lr_at(const TrainingConfig &cfg, std::uint64_t step);
double dual_lr_at(const TrainingConfig &cfg, std::uint64_t step);

// ---------------------------------------------------------------------------
// Probes and the full loop

// Recall@1 of each distribution against ground truth when present,
// pseudo labels otherwise. Conditioning latents use the same targets.
// Keys: prior_zp, prior_zk, post_zp, post_zk, aux_zp.
std::map<std::string, double> probe_recall(const Model &model,
                                           const ParamSet &params,
                                           std::span<const PreparedCase> cases,
                                           Execution ex = Execution::kParallel);

using LogSink = std::function<void(const nlohmann::ordered_json &)>;
// Called after every checkpoint_every-th step with the state to persist.
using CheckpointSink = std::function<void(const TrainState &)>;

struct TrainOptions {
  bool warmup_only = false;
  LogSink log;
  CheckpointSink checkpoint;
};

// Runs (or resumes) warm-up, then the loop. Deterministic given config,
// data and the incoming state.
void train(const Model &model, const TrainingConfig &cfg,
           std::span<const PreparedCase> cases, TrainState &state,
           const TrainOptions &opts = {});

}  // namespace pkgc

#endif  // PKGC_TRAINING_H_
