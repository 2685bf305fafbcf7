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

#include "pkgc/optimizer.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pkgc/errors.h"

namespace pkgc {

void adam_ascent(std::span<double> params, std::span<const double> grad,
                 double lr, AdamState &state, const AdamOptions &opts) {
  if (params.size() != grad.size() || state.m.size() != params.size())
    throw ArgumentError("adam: size mismatch");
  ++state.t;
  const double c1 = 1.0 - std::pow(opts.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(opts.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = opts.beta1 * state.m[i] + (1.0 - opts.beta1) * grad[i];
    state.v[i] = opts.beta2 * state.v[i] + (1.0 - opts.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] += lr * mhat / (std::sqrt(vhat) + opts.eps);
  }
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double clip_by_global_norm(std::span<double> grad, double max_norm) {
  const double norm = l2_norm(grad);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (double &g : grad) g *= scale;
  }
  return norm;
}

double cosine_lr(double base_lr, std::uint64_t step, std::uint64_t total,
                 double min_lr) {
  if (total == 0) return base_lr;
  const double frac =
      static_cast<double>(std::min(step, total)) / static_cast<double>(total);
  return min_lr +
         (base_lr - min_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace pkgc
