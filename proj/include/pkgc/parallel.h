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

// Per-case loops over a batch or an evaluation set. kSerial is the
// reference path; kParallel runs iterations on OpenMP threads. Callers write
// per-iteration results into pre-sized slots and reduce them in index
// order afterwards, so both paths produce bitwise-identical output.

#ifndef PKGC_PARALLEL_H_
#define PKGC_PARALLEL_H_

#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <vector>

namespace pkgc {

enum class Execution { kSerial, kParallel };

template <typename Fn>
void for_each_index(Execution ex, std::size_t n, Fn &&fn) {
  if (ex == Execution::kSerial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

// out = sum of parts, accumulated in index order.
inline void reduce_in_order(const std::vector<std::vector<double>> &parts,
                            std::span<double> out) {
  for (double &x : out) x = 0.0;
  for (const auto &p : parts)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p[i];
}

}  // namespace pkgc

#endif  // PKGC_PARALLEL_H_
