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

// Independent oracles: exact enumeration of the latent grid, finite
// differences, enumeration of policy-gradient outcomes and hand-countable
// metric fixtures. Each check returns a pass/fail result.

#ifndef PKGC_ORACLE_H_
#define PKGC_ORACLE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "pkgc/distribution.h"
#include "pkgc/training.h"

namespace pkgc {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct TinyInstanceOptions {
  std::size_t min_memory = 1;
  std::size_t max_memory = 4;
  std::size_t min_knowledge = 1;
  std::size_t max_knowledge = 4;
  std::size_t num_words = 14;  // plus the special tokens: vocab <= 20
  std::size_t dim = 4;
  std::size_t hidden = 5;
  double param_scale = 0.5;
  bool share_pair_params = true;
  bool independent_latents = false;
};

// One random case with its own model and random parameters.
struct TinyInstance {
  Model model;
  ParamSet params;
  PreparedCase c;
};

TinyInstance make_tiny_instance(std::uint64_t seed,
                                const TinyInstanceOptions &opts = {});

// log sum_{zp,zk} p(zp|C) p(zk|C,zp) g(R|C,zp,zk), by direct enumeration.
double exact_log_marginal(const TinyInstance &inst);

// The instance's tables with q replaced by the exact joint posterior.
LatentTables true_posterior_tables(const TinyInstance &inst);

struct ElboBoundStats {
  std::size_t instances = 0;
  double min_slack = 0.0;          // min(log-marginal - ELBO)
  double max_posterior_gap = 0.0;  // max |log-marginal - ELBO(true q)|
};

ElboBoundStats elbo_bound_stats(std::size_t instances, std::uint64_t seed,
                                KlFn kl_fn = kl);

// Central differences with this step; relative error per coordinate is
// |a - n| / max(|a|, |n|, kFdFloor).
inline constexpr double kFdStep = 1e-5;
inline constexpr double kFdFloor = 1e-3;

double fd_relative_error(double analytic, double numeric);

struct GradCheckStats {
  double max_rel_error = 0.0;
  std::string worst;  // objective/group of the largest error
  std::size_t coordinates = 0;
};

GradCheckStats gradient_check_stats(std::size_t seeds, std::uint64_t seed);

struct ReinforceStats {
  double max_abs_error = 0.0;     // estimator mean vs exact gradient
  double max_fd_rel_error = 0.0;  // exact gradient vs finite differences
};

ReinforceStats reinforce_stats(std::size_t instances, std::uint64_t seed);

// Metric fixture failures, empty when all hold.
std::vector<std::string> metric_fixture_failures();

CheckResult check_elbo_bound(std::size_t instances = 200,
                             std::uint64_t seed = 0, KlFn kl_fn = kl);
CheckResult check_gradients(std::size_t seeds = 10, std::uint64_t seed = 0);
CheckResult check_reinforce(std::size_t instances = 10,
                            std::uint64_t seed = 0);
CheckResult check_metric_fixtures();

std::vector<CheckResult> run_selfcheck(std::uint64_t seed = 0);

}  // namespace pkgc

#endif  // PKGC_ORACLE_H_
