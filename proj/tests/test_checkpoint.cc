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

#include "doctest.h"
#include "pkgc/checkpoint.h"
#include "pkgc/synthetic.h"
#include "test_util.h"

using namespace pkgc;

namespace {

struct Fixture {
  Model model;
  std::vector<PreparedCase> cases;
};

Fixture fixture(std::size_t dim = 6) {
  SyntheticSpec spec;
  spec.num_users = 3;
  spec.cases_per_user = 2;
  spec.vocab_size = 200;
  const auto d = generate_synthetic(spec);
  ModelConfig mc;
  mc.dim = dim;
  mc.hidden = 5;
  Fixture f{make_model(mc, Vocab::build(d.cases, d.repo, 1000)), {}};
  f.cases = prepare_cases(f.model.vocab, d.cases, d.repo, &d.truth);
  return f;
}

TrainState trained(const Fixture &f) {
  TrainingConfig cfg = TrainingConfig::desk();
  cfg.warmup_steps = 5;
  cfg.dual_steps = 3;
  cfg.execution = Execution::kSerial;
  TrainState st = init_state(f.model, 9);
  train(f.model, cfg, f.cases, st);
  return st;
}

}  // namespace

TEST_CASE("save and load round-trip the state exactly") {
  const Fixture f = fixture();
  const TrainState st = trained(f);
  const std::string dir = testing::temp_dir("ckpt");
  const std::string path = dir + "/a.json";
  save_checkpoint(path, f.model, st);
  const TrainState back = load_state(path, f.model);
  CHECK(back == st);
  // The RNG continues identically.
  TrainState x = st, y = back;
  CHECK(x.rng.next() == y.rng.next());
  const Checkpoint c = read_checkpoint(path);
  CHECK(c.config_hash == f.model.config_hash());
  CHECK(c.vocab.words() == f.model.vocab.words());
  // Re-saving the loaded state gives the same bytes.
  save_checkpoint(dir + "/b.json", f.model, back);
  CHECK(testing::slurp(path) == testing::slurp(dir + "/b.json"));
}

TEST_CASE("model config json round-trips") {
  ModelConfig mc;
  mc.dim = 7;
  mc.share_pair_params = false;
  mc.independent_latents = true;
  mc.composer.max_seq_len = 99;
  const ModelConfig back = model_config_from_json(model_config_to_json(mc));
  CHECK(back.hash(50) == mc.hash(50));
  CHECK(back.dim == 7);
  CHECK(back.composer.max_seq_len == 99);
  CHECK(mc.hash(50) != ModelConfig{}.hash(50));
  CHECK(mc.hash(50) != mc.hash(51));
}

TEST_CASE("loading rejects mismatched models and damaged files") {
  const Fixture f = fixture();
  const TrainState st = init_state(f.model, 0);
  const std::string dir = testing::temp_dir("ckpt-bad");
  const std::string path = dir + "/a.json";
  save_checkpoint(path, f.model, st);

  const Fixture other = fixture(4);
  CHECK_THROWS_AS(load_state(path, other.model), CheckpointError);

  Model renamed = f.model;
  auto words = std::vector<std::string>(f.model.vocab.words().begin() + kNumSpecial,
                                        f.model.vocab.words().end());
  std::swap(words[0], words[1]);
  renamed = make_model(f.model.config, Vocab(words));
  CHECK_THROWS_AS(load_state(path, renamed), CheckpointError);

  testing::spit(dir + "/trunc.json", testing::slurp(path).substr(0, 100));
  CHECK_THROWS_AS(read_checkpoint(dir + "/trunc.json"), CheckpointError);
  CHECK_THROWS_AS(read_checkpoint(dir + "/missing.json"), Error);

  auto j = checkpoint_to_json(f.model, st);
  j["version"] = kCheckpointVersion + 1;
  CHECK_THROWS_AS(checkpoint_from_json(j), CheckpointError);
  j = checkpoint_to_json(f.model, st);
  j["config_hash"] = "0000";
  CHECK_THROWS_AS(checkpoint_from_json(j), CheckpointError);
  // Checkpoint problems are configuration errors.
  try {
    checkpoint_from_json(j);
  } catch (const Error &e) {
    CHECK(e.error_class() == ErrorClass::kConfig);
  }
}
