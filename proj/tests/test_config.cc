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

#include <cstdlib>

#include "doctest.h"
#include "pkgc/config.h"
#include "test_util.h"

using namespace pkgc;

namespace {

std::string config_error(std::string_view text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError &e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("ini syntax") {
  std::vector<std::string> errors;
  const auto e = parse_ini(
      "# c\n; c\n[a]\n x = 1 \n\ny=two words\n[b]\nbroken\n[c\n=3\n", errors);
  REQUIRE(e.size() == 2);
  CHECK(e[0].section == "a");
  CHECK(e[0].key == "x");
  CHECK(e[0].value == "1");
  CHECK(e[0].line == 4);
  CHECK(e[1].value == "two words");
  REQUIRE(errors.size() == 3);
  CHECK(errors[0].rfind("line 8", 0) == 0);
  CHECK(errors[1].rfind("line 9", 0) == 0);
  CHECK(errors[2].rfind("line 10", 0) == 0);
}

TEST_CASE("empty config gives full-scale defaults") {
  const RunConfig c = parse_run_config("");
  CHECK(c.train.warmup_steps == 5000);
  CHECK(c.train.dual_steps == 1000);
  CHECK(c.train.batch_size == 16);
  CHECK(c.train.warmup_lr == 1e-5);
  CHECK(c.train.dual_lr == 1e-6);
  CHECK(c.train.grad_clip == 2.0);
  CHECK(c.decode.beam_width == 5);
  CHECK(c.decode.min_len == 10);
  CHECK(c.recall_k == std::vector<std::size_t>{1, 2, 5, 10});
  CHECK_FALSE(c.filter_apply);
}

TEST_CASE("values are applied") {
  const RunConfig c = parse_run_config(
      "[run]\nseed = 7\n[train]\nelbo_mode = enumerate\nexecution = serial\n"
      "dual_lr = 2.5e-4\n[select]\nm = 3\nmode = argmax\n[eval]\n"
      "recall_k = 1,3\ngenerate = false\n[model]\nindependent_latents = true\n");
  CHECK(c.seed == 7);
  CHECK(c.train.seed == 7);
  CHECK(c.train.elbo_mode == ElboMode::kEnumerate);
  CHECK(c.train.execution == Execution::kSerial);
  CHECK(c.train.dual_lr == 2.5e-4);
  CHECK(c.select.m == 3);
  CHECK_FALSE(c.select.sample);
  CHECK(c.recall_k == std::vector<std::size_t>{1, 3});
  CHECK(c.model.independent_latents);
  const EvalConfig e = c.eval_config();
  CHECK(e.seed == 7);
  CHECK_FALSE(e.generate);
  CHECK(e.ks == c.recall_k);
}

TEST_CASE("every problem is reported at once") {
  const std::string w = config_error(
      "[train]\nbatch_size = 0\nwarmup_lr = fast\nbogus = 1\n"
      "[nowhere]\nx = 1\n[decode]\nbeam_width = 0\n[train]\nalpha = 1\n"
      "alpha = 2\n");
  CHECK(w.find("invalid config (") == 0);
  CHECK(w.find("batch_size") != std::string::npos);
  CHECK(w.find("line 3") != std::string::npos);   // warmup_lr
  CHECK(w.find("line 4") != std::string::npos);   // unknown key
  CHECK(w.find("line 6") != std::string::npos);   // unknown section
  CHECK(w.find("beam_width") != std::string::npos);
  CHECK(w.find("line 11") != std::string::npos);  // duplicate
  CHECK(w.find("6 errors") != std::string::npos);
}

TEST_CASE("relative paths resolve against the config directory") {
  const std::string dir = testing::temp_dir("config");
  testing::spit(dir + "/run.ini",
                "[data]\ncorpus = data/c.jsonl\nmemory = /abs/m.jsonl\n"
                "[output]\ncheckpoint = ../out/ckpt-{step}.json\n");
  const RunConfig c = load_run_config(dir + "/run.ini");
  CHECK(c.data.corpus == dir + "/data/c.jsonl");
  CHECK(c.data.memory == "/abs/m.jsonl");
  CHECK(c.data.truth.empty());
  const auto parent = std::filesystem::path(dir).parent_path().string();
  CHECK(c.output.checkpoint == parent + "/out/ckpt-{step}.json");
  CHECK_THROWS_AS(load_run_config(dir + "/missing.ini"), ConfigError);
}

TEST_CASE("synthetic spec") {
  const SyntheticSpec s = parse_synthetic_spec(
      "[synthetic]\nnum_users = 3\ndependency_strength = 1.0\nseed = 5\n");
  CHECK(s.num_users == 3);
  CHECK(s.dependency_strength == 1.0);
  CHECK(s.seed == 5);
  CHECK_THROWS_AS(parse_synthetic_spec("[synthetic]\ncases_per_user = 0\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_synthetic_spec("[other]\nx = 1\n"), ConfigError);
}

TEST_CASE("shipped configs parse") {
  const char *dir = std::getenv("PKGC_TEST_CONFIGS");
  if (dir == nullptr) return;
  const RunConfig c = load_run_config(std::string(dir) + "/desk.ini");
  CHECK(c.train.warmup_steps == 500);
  CHECK(c.train.batch_size == 8);
  const SyntheticSpec s =
      load_synthetic_spec(std::string(dir) + "/synthetic.ini");
  CHECK(s.num_users * s.cases_per_user == 2000);
}
