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

#include "pkgc/config.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pkgc/errors.h"

namespace pkgc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t to_u64(const std::string &v) {
  std::uint64_t x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || v.empty())
    throw std::invalid_argument("expected a non-negative integer, got \"" + v +
                                "\"");
  return x;
}

std::size_t to_size(const std::string &v) {
  return static_cast<std::size_t>(to_u64(v));
}

double to_double(const std::string &v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != v.size() || v.empty() || !std::isfinite(x))
    throw std::invalid_argument("expected a number, got \"" + v + "\"");
  return x;
}

bool to_bool(const std::string &v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true or false, got \"" + v + "\"");
}

std::vector<std::size_t> to_size_list(const std::string &v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_size(trim(item)));
  if (out.empty()) throw std::invalid_argument("expected a list of integers");
  return out;
}

using Setter = std::function<void(const std::string &)>;
using SetterTable = std::map<std::string, Setter>;

// Applies entries through the table; unknown and bad keys become errors.
void apply(const std::vector<IniEntry> &entries, const SetterTable &table,
           std::vector<std::string> &errors) {
  std::set<std::string> seen;
  for (const auto &e : entries) {
    const std::string name = e.section.empty() ? e.key : e.section + "." + e.key;
    const std::string where = "line " + std::to_string(e.line) + ": ";
    auto it = table.find(name);
    if (it == table.end()) {
      errors.push_back(where + "unknown key " + name);
      continue;
    }
    if (!seen.insert(name).second) {
      errors.push_back(where + "duplicate key " + name);
      continue;
    }
    try {
      it->second(e.value);
    } catch (const std::invalid_argument &ex) {
      errors.push_back(where + name + ": " + ex.what());
    }
  }
}

[[noreturn]] void fail(const std::string &what,
                       const std::vector<std::string> &errors) {
  std::string msg = what + " (" + std::to_string(errors.size()) +
                    (errors.size() == 1 ? " error):" : " errors):");
  for (const auto &e : errors) msg += "\n  " + e;
  throw ConfigError(msg);
}

std::string resolve(const std::string &base, const std::string &p) {
  if (p.empty() || base.empty()) return p;
  const std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

}  // namespace

std::vector<IniEntry> parse_ini(std::string_view text,
                                std::vector<std::string> &errors) {
  std::vector<IniEntry> out;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        errors.push_back(where + "malformed section header");
        continue;
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected key = value");
      continue;
    }
    IniEntry e{section, trim(std::string_view(line).substr(0, eq)),
               trim(std::string_view(line).substr(eq + 1)), line_no};
    if (e.key.empty()) {
      errors.push_back(where + "empty key");
      continue;
    }
    out.push_back(std::move(e));
  }
  return out;
}

EvalConfig RunConfig::eval_config() const {
  EvalConfig e;
  e.decode = decode;
  e.select = select;
  e.ks = recall_k;
  e.seed = seed;
  e.generate = eval_generate;
  e.execution = train.execution;
  return e;
}

RunConfig parse_run_config(std::string_view text, const std::string &base_dir) {
  std::vector<std::string> errors;
  const auto entries = parse_ini(text, errors);
  RunConfig c;
  c.train.seed = 0;
  TrainingConfig &t = c.train;
  ModelConfig &m = c.model;
  DecodeConfig &d = c.decode;

  auto str = [](std::string &dst) {
    return [&dst](const std::string &v) {
      if (v.empty()) throw std::invalid_argument("expected a value");
      dst = v;
    };
  };
  auto sz = [](std::size_t &dst) {
    return [&dst](const std::string &v) { dst = to_size(v); };
  };
  auto dbl = [](double &dst) {
    return [&dst](const std::string &v) { dst = to_double(v); };
  };
  auto bln = [](bool &dst) {
    return [&dst](const std::string &v) { dst = to_bool(v); };
  };

  const SetterTable table = {
      {"run.seed", [&](const std::string &v) { c.seed = to_u64(v); }},
      {"data.corpus", str(c.data.corpus)},
      {"data.memory", str(c.data.memory)},
      {"data.truth", str(c.data.truth)},
      {"data.eval_corpus", str(c.data.eval_corpus)},
      {"data.eval_truth", str(c.data.eval_truth)},
      {"output.log", str(c.output.log)},
      {"output.report", str(c.output.report)},
      {"output.checkpoint", str(c.output.checkpoint)},
      {"filter.apply", bln(c.filter_apply)},
      {"filter.min_fragments", sz(c.filter.min_fragments)},
      {"filter.min_len", sz(c.filter.min_len)},
      {"filter.max_len", sz(c.filter.max_len)},
      {"model.dim", sz(m.dim)},
      {"model.hidden", sz(m.hidden)},
      {"model.max_vocab", sz(m.max_vocab)},
      {"model.share_pair_params", bln(m.share_pair_params)},
      {"model.independent_latents", bln(m.independent_latents)},
      {"model.max_seq_len", sz(m.composer.max_seq_len)},
      {"model.context_floor", sz(m.composer.context_floor)},
      {"model.sep_between_utterances", bln(m.composer.sep_between_utterances)},
      {"train.warmup_steps", sz(t.warmup_steps)},
      {"train.dual_steps", sz(t.dual_steps)},
      {"train.batch_size", sz(t.batch_size)},
      {"train.warmup_lr", dbl(t.warmup_lr)},
      {"train.dual_lr", dbl(t.dual_lr)},
      {"train.adam_beta1", dbl(t.adam_beta1)},
      {"train.adam_beta2", dbl(t.adam_beta2)},
      {"train.grad_clip", dbl(t.grad_clip)},
      {"train.min_lr", dbl(t.min_lr)},
      {"train.alpha", dbl(t.alpha)},
      {"train.temperature", dbl(t.temperature)},
      {"train.elbo_mode",
       [&](const std::string &v) {
         if (v == "sample")
           t.elbo_mode = ElboMode::kSample;
         else if (v == "enumerate")
           t.elbo_mode = ElboMode::kEnumerate;
         else
           throw std::invalid_argument("expected sample or enumerate");
       }},
      {"train.warmup_generator", bln(t.warmup_generator)},
      {"train.reward_baseline", bln(t.reward_baseline)},
      {"train.baseline_decay", dbl(t.baseline_decay)},
      {"train.probe_every", sz(t.probe_every)},
      {"train.probe_cases", sz(t.probe_cases)},
      {"train.early_stop_patience", sz(t.early_stop_patience)},
      {"train.checkpoint_every", sz(t.checkpoint_every)},
      {"train.execution",
       [&](const std::string &v) {
         if (v == "serial")
           t.execution = Execution::kSerial;
         else if (v == "parallel")
           t.execution = Execution::kParallel;
         else
           throw std::invalid_argument("expected serial or parallel");
       }},
      {"decode.beam_width", sz(d.beam_width)},
      {"decode.min_len", sz(d.min_len)},
      {"decode.repetition_penalty", dbl(d.repetition_penalty)},
      {"decode.length_penalty", dbl(d.length_penalty)},
      {"decode.max_len", sz(d.max_len)},
      {"select.m", sz(c.select.m)},
      {"select.mode",
       [&](const std::string &v) {
         if (v == "sample")
           c.select.sample = true;
         else if (v == "argmax")
           c.select.sample = false;
         else
           throw std::invalid_argument("expected sample or argmax");
       }},
      {"eval.recall_k",
       [&](const std::string &v) { c.recall_k = to_size_list(v); }},
      {"eval.generate", bln(c.eval_generate)},
      {"eval.max_cases", sz(c.eval_max_cases)},
  };
  apply(entries, table, errors);

  t.seed = c.seed;
  for (auto &p : t.problems()) errors.push_back(p);
  for (auto &p : d.problems()) errors.push_back(p);
  if (m.dim == 0) errors.push_back("model.dim must be >= 1");
  if (m.hidden == 0) errors.push_back("model.hidden must be >= 1");
  if (m.max_vocab <= kNumSpecial)
    errors.push_back("model.max_vocab must exceed the special tokens");
  if (m.composer.max_seq_len < 4)
    errors.push_back("model.max_seq_len must be >= 4");
  if (c.select.m == 0) errors.push_back("select.m must be >= 1");
  for (std::size_t k : c.recall_k)
    if (k == 0) errors.push_back("eval.recall_k entries must be >= 1");
  if (c.filter.min_len > c.filter.max_len)
    errors.push_back("filter.min_len must be <= filter.max_len");
  if (!errors.empty()) fail("invalid config", errors);

  for (std::string *p :
       {&c.data.corpus, &c.data.memory, &c.data.truth, &c.data.eval_corpus,
        &c.data.eval_truth, &c.output.log, &c.output.report,
        &c.output.checkpoint})
    *p = resolve(base_dir, *p);
  return c;
}

std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig load_run_config(const std::string &path) {
  const std::string base =
      std::filesystem::path(path).parent_path().string();
  return parse_run_config(read_text_file(path), base);
}

SyntheticSpec parse_synthetic_spec(std::string_view text) {
  std::vector<std::string> errors;
  const auto entries = parse_ini(text, errors);
  SyntheticSpec s;
  const SetterTable table = {
      {"synthetic.num_users",
       [&](const std::string &v) { s.num_users = to_size(v); }},
      {"synthetic.cases_per_user",
       [&](const std::string &v) { s.cases_per_user = to_size(v); }},
      {"synthetic.num_memory",
       [&](const std::string &v) { s.num_memory = to_size(v); }},
      {"synthetic.num_knowledge",
       [&](const std::string &v) { s.num_knowledge = to_size(v); }},
      {"synthetic.vocab_size",
       [&](const std::string &v) { s.vocab_size = to_size(v); }},
      {"synthetic.dependency_strength",
       [&](const std::string &v) { s.dependency_strength = to_double(v); }},
      {"synthetic.distractor_rate",
       [&](const std::string &v) { s.distractor_rate = to_double(v); }},
      {"synthetic.seed", [&](const std::string &v) { s.seed = to_u64(v); }},
  };
  apply(entries, table, errors);
  for (auto &p : s.problems()) errors.push_back(p);
  if (!errors.empty()) fail("invalid synthetic spec", errors);
  return s;
}

SyntheticSpec load_synthetic_spec(const std::string &path) {
  return parse_synthetic_spec(read_text_file(path));
}

}  // namespace pkgc
