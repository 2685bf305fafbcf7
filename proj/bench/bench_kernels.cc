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

// Serial reference against OpenMP execution for the per-case kernels.

#include <benchmark/benchmark.h>

#include "pkgc/inference.h"
#include "pkgc/synthetic.h"
#include "pkgc/training.h"

namespace {

using namespace pkgc;

struct Fixture {
  Model model;
  std::vector<PreparedCase> cases;
  TrainState state;
};

const Fixture &fixture() {
  static const Fixture f = [] {
    SyntheticSpec spec;
    spec.num_users = 32;
    spec.cases_per_user = 8;
    const SyntheticData data = generate_synthetic(spec);
    Fixture out;
    out.model = make_model(ModelConfig{},
                           Vocab::build(data.cases, data.repo, 1000));
    out.cases = prepare_cases(out.model.vocab, data.cases, data.repo,
                              &data.truth);
    out.state = init_state(out.model, 0);
    out.state.warmed_up = true;
    return out;
  }();
  return f;
}

Execution exec(const benchmark::State &st) {
  return st.range(0) ? Execution::kParallel : Execution::kSerial;
}

void BM_WarmupStep(benchmark::State &st) {
  const Fixture &f = fixture();
  TrainingConfig cfg = TrainingConfig::desk();
  cfg.batch_size = static_cast<std::size_t>(st.range(1));
  cfg.execution = exec(st);
  Batch batch;
  for (std::size_t i = 0; i < cfg.batch_size; ++i)
    batch.push_back(&f.cases[i % f.cases.size()]);
  for (auto _ : st) {
    TrainState s = f.state;
    benchmark::DoNotOptimize(warmup_step(f.model, cfg, s, batch));
  }
}
BENCHMARK(BM_WarmupStep)->ArgsProduct({{0, 1}, {8, 32}});

void BM_DualIteration(benchmark::State &st) {
  const Fixture &f = fixture();
  TrainingConfig cfg = TrainingConfig::desk();
  cfg.batch_size = static_cast<std::size_t>(st.range(1));
  cfg.execution = exec(st);
  Batch batch;
  for (std::size_t i = 0; i < cfg.batch_size; ++i)
    batch.push_back(&f.cases[i % f.cases.size()]);
  for (auto _ : st) {
    TrainState s = f.state;
    dual_step(f.model, cfg, s, batch);
    theta_step(f.model, cfg, s, batch);
    benchmark::DoNotOptimize(distill_step(f.model, cfg, s, batch));
  }
}
BENCHMARK(BM_DualIteration)->ArgsProduct({{0, 1}, {8, 32}});

void BM_ProbeRecall(benchmark::State &st) {
  const Fixture &f = fixture();
  for (auto _ : st)
    benchmark::DoNotOptimize(
        probe_recall(f.model, f.state.params, f.cases, exec(st)));
}
BENCHMARK(BM_ProbeRecall)->Arg(0)->Arg(1);

void BM_EvaluateSelection(benchmark::State &st) {
  const Fixture &f = fixture();
  EvalConfig cfg;
  cfg.generate = false;
  cfg.execution = exec(st);
  for (auto _ : st)
    benchmark::DoNotOptimize(evaluate(f.model, f.state.params, f.cases, cfg));
}
BENCHMARK(BM_EvaluateSelection)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
