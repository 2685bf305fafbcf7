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

#include "pkgc/checkpoint.h"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pkgc {

using nlohmann::ordered_json;

namespace {

constexpr const char *kFormat = "pkgc-checkpoint";

ordered_json adam_to_json(const AdamState &a) {
  return ordered_json{{"t", a.t}, {"m", a.m}, {"v", a.v}};
}

AdamState adam_from_json(const ordered_json &j) {
  AdamState a;
  a.t = j.at("t").get<std::uint64_t>();
  a.m = j.at("m").get<std::vector<double>>();
  a.v = j.at("v").get<std::vector<double>>();
  return a;
}

void check_size(const std::string &name, std::size_t got, std::size_t want) {
  if (got != want)
    throw CheckpointError("checkpoint " + name + " has " +
                          std::to_string(got) + " entries, model expects " +
                          std::to_string(want));
}

}  // namespace

ordered_json model_config_to_json(const ModelConfig &c) {
  return ordered_json{
      {"dim", c.dim},
      {"hidden", c.hidden},
      {"max_vocab", c.max_vocab},
      {"share_pair_params", c.share_pair_params},
      {"independent_latents", c.independent_latents},
      {"max_seq_len", c.composer.max_seq_len},
      {"context_floor", c.composer.context_floor},
      {"sep_between_utterances", c.composer.sep_between_utterances},
  };
}

ModelConfig model_config_from_json(const ordered_json &j) {
  ModelConfig c;
  c.dim = j.at("dim").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.max_vocab = j.at("max_vocab").get<std::size_t>();
  c.share_pair_params = j.at("share_pair_params").get<bool>();
  c.independent_latents = j.at("independent_latents").get<bool>();
  c.composer.max_seq_len = j.at("max_seq_len").get<std::size_t>();
  c.composer.context_floor = j.at("context_floor").get<std::size_t>();
  c.composer.sep_between_utterances =
      j.at("sep_between_utterances").get<bool>();
  c.composer.independent_latents = c.independent_latents;
  return c;
}

ordered_json checkpoint_to_json(const Model &model, const TrainState &s) {
  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kCheckpointVersion;
  j["config_hash"] = model.config_hash();
  j["model"] = model_config_to_json(model.config);
  j["vocab"] = model.vocab.words();
  ordered_json st;
  st["warmup_step"] = s.warmup_step;
  st["dual_step"] = s.dual_step;
  st["warmed_up"] = s.warmed_up;
  st["stopped_early"] = s.stopped_early;
  st["baseline_re1"] = s.baseline_re1;
  st["baseline_re2"] = s.baseline_re2;
  st["best_probe"] = s.best_probe;
  st["probes_since_best"] = s.probes_since_best;
  st["rng"] = s.rng.serialize();
  st["params"] = ordered_json{{"theta", s.params.theta},
                              {"phi", s.params.phi},
                              {"psi", s.params.psi},
                              {"gen", s.params.gen}};
  st["adam"] = ordered_json{{"theta", adam_to_json(s.adam_theta)},
                            {"phi", adam_to_json(s.adam_phi)},
                            {"psi", adam_to_json(s.adam_psi)},
                            {"gen", adam_to_json(s.adam_gen)}};
  j["state"] = std::move(st);
  return j;
}

Checkpoint checkpoint_from_json(const ordered_json &j) {
  try {
    if (j.value("format", std::string()) != kFormat)
      throw CheckpointError("not a checkpoint file");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw CheckpointError("unsupported checkpoint version " +
                            j.at("version").dump());
    Checkpoint c;
    c.config = model_config_from_json(j.at("model"));
    c.vocab = Vocab(j.at("vocab").get<std::vector<std::string>>());
    c.config_hash = j.at("config_hash").get<std::string>();
    if (c.config_hash != c.config.hash(c.vocab.size()))
      throw CheckpointError("checkpoint config hash does not match its "
                            "stored model config");
    const auto &st = j.at("state");
    TrainState &s = c.state;
    s.warmup_step = st.at("warmup_step").get<std::uint64_t>();
    s.dual_step = st.at("dual_step").get<std::uint64_t>();
    s.warmed_up = st.at("warmed_up").get<bool>();
    s.stopped_early = st.at("stopped_early").get<bool>();
    s.baseline_re1 = st.at("baseline_re1").get<double>();
    s.baseline_re2 = st.at("baseline_re2").get<double>();
    s.best_probe = st.at("best_probe").get<double>();
    s.probes_since_best = st.at("probes_since_best").get<std::uint64_t>();
    s.rng.deserialize(st.at("rng").get<std::string>());
    const auto &p = st.at("params");
    s.params.theta = p.at("theta").get<Params>();
    s.params.phi = p.at("phi").get<Params>();
    s.params.psi = p.at("psi").get<Params>();
    s.params.gen = p.at("gen").get<Params>();
    const auto &a = st.at("adam");
    s.adam_theta = adam_from_json(a.at("theta"));
    s.adam_phi = adam_from_json(a.at("phi"));
    s.adam_psi = adam_from_json(a.at("psi"));
    s.adam_gen = adam_from_json(a.at("gen"));
    return c;
  } catch (const nlohmann::json::exception &e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string &path, const Model &model,
                     const TrainState &state) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + tmp);
    out << checkpoint_to_json(model, state).dump() << '\n';
    if (!out) throw DataError("failed writing checkpoint " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw DataError("cannot move checkpoint into place: " + path);
}

Checkpoint read_checkpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw CheckpointError("malformed checkpoint " + path + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

TrainState load_state(const std::string &path, const Model &model) {
  Checkpoint c = read_checkpoint(path);
  if (c.config_hash != model.config_hash())
    throw CheckpointError("checkpoint config hash " + c.config_hash +
                          " does not match run config hash " +
                          model.config_hash());
  if (c.vocab.words() != model.vocab.words())
    throw CheckpointError("checkpoint vocabulary differs from the model's");
  const ParamSet want = zero_like(model);
  check_size("theta", c.state.params.theta.size(), want.theta.size());
  check_size("phi", c.state.params.phi.size(), want.phi.size());
  check_size("psi", c.state.params.psi.size(), want.psi.size());
  check_size("gen", c.state.params.gen.size(), want.gen.size());
  return c.state;
}

}  // namespace pkgc
