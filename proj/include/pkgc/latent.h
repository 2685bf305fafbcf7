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

// The five categorical models over the memory latent Zp and the knowledge
// latent Zk:
//
//   prior      p_theta(Zp | C)          p_theta(Zk | C, Zp)
//   posterior  q_phi(Zp | C, R)         q_phi(Zk | C, R, Zp)
//   auxiliary  pi_psi(Zp | C, R, Zk)
//
// Each evaluation keeps the composed candidate sequences so that callers
// can push logit gradients back into the owning parameter group.

#ifndef PKGC_LATENT_H_
#define PKGC_LATENT_H_

#include <memory>
#include <span>
#include <vector>

#include "pkgc/composer.h"
#include "pkgc/distribution.h"
#include "pkgc/neural.h"

namespace pkgc {

// Which scorer parameters a distribution reads.
enum class ParamGroup { kTheta, kPhi, kPsi };

struct LatentModels {
  std::shared_ptr<const Scorer> prior;      // theta
  std::shared_ptr<const Scorer> posterior;  // phi
  std::shared_ptr<const Scorer> auxiliary;  // psi
  ComposerOptions composer;
  // When false, theta and phi each hold two scorer blocks [Zp | Zk] and the
  // Zp and Zk distributions stop sharing weights.
  bool share_pair_params = true;

  std::size_t num_params(ParamGroup group) const;
  const Scorer &scorer(DistKind kind) const;
  // Sub-span of a group's parameters read by one distribution kind.
  std::span<const double> slice(DistKind kind,
                                std::span<const double> group) const;
  std::span<double> slice(DistKind kind, std::span<double> group) const;
};

ParamGroup param_group(DistKind kind);

struct LatentEval {
  DistKind kind;
  std::vector<ComposedSequence> composed;
  std::vector<double> logits;
  CategoricalDistribution dist;
};

// The conditioning material for one case. `response` is empty at
// inference time; the posterior and auxiliary models reject it then.
struct LatentInputs {
  std::span<const TokenIds> context;
  std::span<const TokenId> response;
  std::span<const TokenIds> memory;
  std::span<const TokenIds> knowledge;
};

LatentInputs latent_inputs(const EncodedCase &c);

LatentEval prior_zp(const LatentModels &m, std::span<const double> theta,
                    const LatentInputs &in);
// Conditions on an explicit memory segment (one fragment, or several
// concatenated when more than one is selected).
LatentEval prior_zk(const LatentModels &m, std::span<const double> theta,
                    const LatentInputs &in, std::span<const TokenId> p_sel);
LatentEval prior_zk(const LatentModels &m, std::span<const double> theta,
                    const LatentInputs &in, std::size_t zp);
LatentEval post_zp(const LatentModels &m, std::span<const double> phi,
                   const LatentInputs &in);
LatentEval post_zk(const LatentModels &m, std::span<const double> phi,
                   const LatentInputs &in, std::size_t zp);
LatentEval aux_zp(const LatentModels &m, std::span<const double> psi,
                  const LatentInputs &in, std::size_t zk);

// Pushes d_logits through the scorer owning ev.kind into the group
// gradient (full group span; the kind's slice is selected internally).
void backprop(const LatentModels &m, const LatentEval &ev,
              std::span<const double> group_params,
              std::span<const double> d_logits, std::span<double> group_grad);

// Concatenation of fragments in the given order.
TokenIds concat_fragments(std::span<const TokenIds> memory,
                          std::span<const std::size_t> order);

// Full |P| x |K| table of p(Zk | C, Zp = zp) rows.
std::vector<CategoricalDistribution> prior_zk_table(
    const LatentModels &m, std::span<const double> theta,
    const LatentInputs &in);
std::vector<CategoricalDistribution> post_zk_table(
    const LatentModels &m, std::span<const double> phi,
    const LatentInputs &in);

struct LatentAssignment {
  std::size_t zp = 0;
  std::size_t zk = 0;
  bool operator==(const LatentAssignment &) const = default;
};

}  // namespace pkgc

#endif  // PKGC_LATENT_H_
