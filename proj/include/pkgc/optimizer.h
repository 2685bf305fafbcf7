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

#ifndef PKGC_OPTIMIZER_H_
#define PKGC_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <vector>

namespace pkgc {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam moments for one parameter group.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
  bool operator==(const AdamState &) const = default;
};

// Gradient-ascent Adam step: params += lr * m_hat / (sqrt(v_hat) + eps).
void adam_ascent(std::span<double> params, std::span<const double> grad,
                 double lr, AdamState &state, const AdamOptions &opts = {});

// Rescales grad in place so its L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_by_global_norm(std::span<double> grad, double max_norm);

double l2_norm(std::span<const double> v);

// min_lr + (base_lr - min_lr) * (1 + cos(pi * step / total)) / 2, with step
// clamped to [0, total].
double cosine_lr(double base_lr, std::uint64_t step, std::uint64_t total,
                 double min_lr = 0.0);

}  // namespace pkgc

#endif  // PKGC_OPTIMIZER_H_
