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

#ifndef PKGC_DISTRIBUTION_H_
#define PKGC_DISTRIBUTION_H_

#include <cstddef>
#include <span>
#include <vector>

#include "pkgc/rng.h"

namespace pkgc {

// Probability vector over N >= 1 candidates.
class CategoricalDistribution {
 public:
  CategoricalDistribution() = default;
  // Validates: entries in [0, 1], sum within 1e-9 of one.
  explicit CategoricalDistribution(std::vector<double> probs);

  // Max-subtracted softmax of logits.
  static CategoricalDistribution from_logits(std::span<const double> logits);
  static CategoricalDistribution uniform(std::size_t n);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double> &probs() const { return probs_; }
  std::size_t argmax() const;  // lowest index on ties
  // Indices of the m most probable entries, most probable first.
  std::vector<std::size_t> top(std::size_t m) const;

 private:
  std::vector<double> probs_;
};

// log softmax with max subtraction.
std::vector<double> log_softmax(std::span<const double> logits);

// Inverse-CDF draw; consumes exactly one uniform from rng.
std::size_t sample(const CategoricalDistribution &dist, Rng &rng);
std::size_t sample_with_uniform(const CategoricalDistribution &dist, double u);

// sum_i p_i log(p_i / q_i). Entries of q are floored at kKlFloor; a q_i
// of exactly zero where p_i > 0 is a NumericError.
inline constexpr double kKlFloor = 1e-12;
double kl(const CategoricalDistribution &p, const CategoricalDistribution &q);
using KlFn = double (*)(const CategoricalDistribution &,
                        const CategoricalDistribution &);

// p_i^(1/T), renormalized. T <= 0 is an ArgumentError.
CategoricalDistribution temper(const CategoricalDistribution &dist, double t);

}  // namespace pkgc

#endif  // PKGC_DISTRIBUTION_H_
