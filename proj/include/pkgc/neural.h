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

// Differentiable model contracts and the small reference models.
//
// Parameters live outside the models in flat vectors so that optimizers,
// checkpoints and finite-difference checks can treat every parameter
// group the same way. Every model call takes the parameter span it reads;
// gradients are accumulated (+=) into a caller-owned span of equal size.

#ifndef PKGC_NEURAL_H_
#define PKGC_NEURAL_H_

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pkgc/composer.h"
#include "pkgc/distribution.h"
#include "pkgc/rng.h"
#include "pkgc/vocab.h"

namespace pkgc {

using Params = std::vector<double>;
using Vec = Eigen::VectorXd;

struct ModelDims {
  std::size_t vocab_size = 0;
  std::size_t dim = 32;     // representation width d
  std::size_t hidden = 32;  // perceptron hidden width
};

// Uniform in [-scale, scale] from the run seed.
void init_uniform(std::span<double> params, Rng &rng, double scale = 0.1);

// Sequence -> fixed-width representation of the [CLS] position.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual std::size_t num_params() const = 0;
  virtual std::size_t width() const = 0;
  virtual Vec encode(std::span<const double> params,
                     const ComposedSequence &seq) const = 0;
  // grad += J^T d_out, where J = d encode / d params.
  virtual void backward(std::span<const double> params,
                        const ComposedSequence &seq, const Vec &d_out,
                        std::span<double> grad) const = 0;
};

// Representation -> scalar logit.
class ScoringHead {
 public:
  virtual ~ScoringHead() = default;
  virtual std::size_t num_params() const = 0;
  virtual double score(std::span<const double> params, const Vec &h) const = 0;
  // grad += upstream * d score / d params; returns d score / d h * upstream.
  virtual Vec backward(std::span<const double> params, const Vec &h,
                       double upstream, std::span<double> grad) const = 0;
};

// Encoder followed by a head over one parameter vector laid out as
// [encoder | head].
class Scorer {
 public:
  Scorer(std::shared_ptr<const Encoder> encoder,
         std::shared_ptr<const ScoringHead> head);
  virtual ~Scorer() = default;

  virtual std::size_t num_params() const;
  virtual double logit(std::span<const double> params,
                       const ComposedSequence &seq) const;
  // grad += upstream * d logit / d params.
  virtual void accumulate_gradient(std::span<const double> params,
                                   const ComposedSequence &seq,
                                   double upstream,
                                   std::span<double> grad) const;

  const Encoder &encoder() const { return *encoder_; }

 protected:
  Scorer() = default;

 private:
  std::shared_ptr<const Encoder> encoder_;
  std::shared_ptr<const ScoringHead> head_;
};

// Per-role mean token embeddings (context, response, condition, candidate)
// and candidate-interaction products, then a two-layer tanh perceptron.
// Special tokens other than [UNK] are skipped.
class BagOfEmbeddingsEncoder : public Encoder {
 public:
  explicit BagOfEmbeddingsEncoder(ModelDims dims);
  std::size_t num_params() const override;
  std::size_t width() const override { return dims_.dim; }
  Vec encode(std::span<const double> params,
             const ComposedSequence &seq) const override;
  void backward(std::span<const double> params, const ComposedSequence &seq,
                const Vec &d_out, std::span<double> grad) const override;

  static constexpr std::size_t kRoles = 4;
  static constexpr std::size_t kFeatureBlocks = 7;

 private:
  struct Forward;
  Forward forward(std::span<const double> params,
                  const ComposedSequence &seq) const;

  ModelDims dims_;
};

// One tanh hidden layer, linear output.
class MlpHead : public ScoringHead {
 public:
  MlpHead(std::size_t in_width, std::size_t hidden);
  std::size_t num_params() const override;
  double score(std::span<const double> params, const Vec &h) const override;
  Vec backward(std::span<const double> params, const Vec &h, double upstream,
               std::span<double> grad) const override;

 private:
  std::size_t in_;
  std::size_t hidden_;
};

std::shared_ptr<const Scorer> make_reference_scorer(const ModelDims &dims);

struct ScoredCandidates {
  std::vector<double> logits;
  CategoricalDistribution dist;
};

// Softmax over scorer logits of every composed candidate. Throws
// ArgumentError on an empty list.
ScoredCandidates score_candidates(const Scorer &scorer,
                                  std::span<const double> params,
                                  std::span<const ComposedSequence> composed);

// grad += sum_i d_logits[i] * d logit_i / d params.
void backprop_logits(const Scorer &scorer, std::span<const double> params,
                     std::span<const ComposedSequence> composed,
                     std::span<const double> d_logits, std::span<double> grad);

// What the generator conditions on: context, selected memory, selected
// knowledge.
struct GenerationCondition {
  std::span<const TokenIds> context;
  std::span<const TokenId> memory;
  std::span<const TokenId> knowledge;
};

// Autoregressive generator. Decoder state is an opaque vector.
class Generator {
 public:
  using State = std::vector<double>;

  virtual ~Generator() = default;
  virtual std::size_t num_params() const = 0;
  virtual std::size_t vocab_size() const = 0;

  // Teacher-forced sum_i log g(target_i | cond, target_<i). Throws
  // VocabError for ids outside the vocabulary.
  virtual double log_likelihood(std::span<const double> params,
                                const GenerationCondition &cond,
                                std::span<const TokenId> target) const = 0;
  // Same value; also grad += upstream * d ll / d params.
  virtual double log_likelihood_gradient(std::span<const double> params,
                                         const GenerationCondition &cond,
                                         std::span<const TokenId> target,
                                         double upstream,
                                         std::span<double> grad) const = 0;

  virtual State start(std::span<const double> params,
                      const GenerationCondition &cond) const = 0;
  virtual std::vector<double> next_token_logits(
      std::span<const double> params, const State &state) const = 0;
  virtual State advance(std::span<const double> params, const State &state,
                        TokenId token) const = 0;
};

struct VocabError : Error {
  explicit VocabError(const std::string &w) : Error(ErrorClass::kData, w) {}
};

// h_0 = tanh(W_c [mean C; mean P; mean K] + b_c)
// h_t = tanh(W_h h_{t-1} + W_x e(x_t) + b_h),  x_1 = [BOS]
// logits_t = W_o h_t + b_o
class RecurrentGenerator : public Generator {
 public:
  explicit RecurrentGenerator(ModelDims dims);
  std::size_t num_params() const override;
  std::size_t vocab_size() const override { return dims_.vocab_size; }
  double log_likelihood(std::span<const double> params,
                        const GenerationCondition &cond,
                        std::span<const TokenId> target) const override;
  double log_likelihood_gradient(std::span<const double> params,
                                 const GenerationCondition &cond,
                                 std::span<const TokenId> target,
                                 double upstream,
                                 std::span<double> grad) const override;
  State start(std::span<const double> params,
              const GenerationCondition &cond) const override;
  std::vector<double> next_token_logits(std::span<const double> params,
                                        const State &state) const override;
  State advance(std::span<const double> params, const State &state,
                TokenId token) const override;

 private:
  struct Layout;
  Layout layout() const;
  void check_target(std::span<const TokenId> target) const;

  ModelDims dims_;
};

// Plain objective over a parameter vector: returns the value and writes
// the gradient into grad (overwritten, same size as params).
using Objective =
    std::function<double(std::span<const double> params, std::span<double> grad)>;

// Evaluates objective and its gradient; throws NumericError when the value
// or any gradient entry is not finite.
std::vector<double> gradient(const Objective &objective,
                             std::span<const double> params,
                             double *value = nullptr);

}  // namespace pkgc

#endif  // PKGC_NEURAL_H_
