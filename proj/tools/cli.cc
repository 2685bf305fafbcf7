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

#include "pkgc/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pkgc/checkpoint.h"
#include "pkgc/config.h"
#include "pkgc/errors.h"
#include "pkgc/inference.h"
#include "pkgc/oracle.h"
#include "pkgc/synthetic.h"
#include "pkgc/training.h"

namespace pkgc {

namespace fs = std::filesystem;

std::string checkpoint_path_for(const std::string &pattern,
                                unsigned long long step) {
  std::string out = pattern;
  const std::string key = "{step}";
  for (auto pos = out.find(key); pos != std::string::npos;
       pos = out.find(key, pos))
    out.replace(pos, key.size(), std::to_string(step));
  return out;
}

namespace {

bool exists_nonempty(const std::string &path) {
  std::error_code ec;
  return fs::exists(path, ec) && fs::file_size(path, ec) > 0;
}

// Refuses to replace an existing output unless forced.
void guard_output(const std::string &path, bool force) {
  if (!force && exists_nonempty(path))
    throw ConfigError(path + " exists; pass --force to overwrite");
}

void ensure_parent(const std::string &path) {
  const fs::path parent = fs::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) fs::create_directories(parent, ec);
}

void write_file(const std::string &path, const std::string &text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

void require(std::vector<std::string> &missing, const std::string &value,
             const std::string &key) {
  if (value.empty()) missing.push_back(key + " is required");
}

void throw_missing(const std::vector<std::string> &missing,
                   const std::string &command) {
  if (missing.empty()) return;
  std::string msg = "invalid config for " + command + ":";
  for (const auto &m : missing) msg += "\n  " + m;
  throw ConfigError(msg);
}

struct Dataset {
  std::vector<DialogueCase> cases;
  MemoryRepository repo;
  std::optional<std::vector<TruthRecord>> truth;

  const std::vector<TruthRecord> *truth_ptr() const {
    return truth ? &*truth : nullptr;
  }
};

Dataset load_dataset(const RunConfig &cfg, const std::string &corpus,
                     const std::string &truth) {
  Dataset d;
  d.cases = load_corpus(corpus);
  d.repo = load_memory(cfg.data.memory);
  if (cfg.filter_apply) d.repo = filter_repository(d.repo, cfg.filter);
  if (!truth.empty()) d.truth = load_truth(truth);
  return d;
}

// Appends to an existing log on resume, replaces it with --force.
class LogWriter {
 public:
  LogWriter(const std::string &path, bool resume, bool force) {
    if (path.empty()) return;
    if (!resume) guard_output(path, force);
    ensure_parent(path);
    out_.open(path, std::ios::binary |
                        (resume && !force ? std::ios::app : std::ios::trunc));
    if (!out_) throw DataError("cannot open log " + path);
  }
  void operator()(const nlohmann::ordered_json &j) {
    if (!out_.is_open()) return;
    out_ << j.dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

RunConfig config_from(const std::string &path) {
  if (path.empty()) throw ConfigError("--config is required");
  return load_run_config(path);
}

// --------------------------------------------------------------------------

int cmd_gen_data(const std::string &spec_path, const std::string &out_dir,
                 std::optional<std::uint64_t> seed, bool force,
                 std::ostream &out) {
  SyntheticSpec spec = load_synthetic_spec(spec_path);
  if (seed) spec.seed = *seed;
  const SyntheticData data = generate_synthetic(spec);
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw DataError("cannot create output directory " + out_dir);
  const std::string corpus = (dir / "corpus.jsonl").string();
  const std::string memory = (dir / "memory.jsonl").string();
  const std::string truth = (dir / "truth.jsonl").string();
  for (const auto &p : {corpus, memory, truth}) guard_output(p, force);
  write_corpus(corpus, data.cases);
  write_memory(memory, data.repo);
  write_truth(truth, data.truth);
  out << "wrote " << data.cases.size() << " cases, " << data.repo.num_users()
      << " users to " << out_dir << "\n";
  return 0;
}

int cmd_label(const std::string &corpus_path, const std::string &memory_path,
              const std::string &out_path, bool force, std::ostream &out) {
  const auto cases = load_corpus(corpus_path);
  const auto repo = load_memory(memory_path);
  std::string text;
  for (const auto &c : cases) {
    if (!repo.contains(c.user_key))
      throw DataError("case " + c.id + ": no memory for user " + c.user_key);
    const PseudoLabels l =
        pseudo_labels(c, MemorySet{repo.entries.at(c.user_key)});
    nlohmann::ordered_json j;
    j["id"] = c.id;
    j["k_bar"] = l.k_bar;
    j["p_bar"] = l.p_bar;
    text += j.dump() + "\n";
  }
  guard_output(out_path, force);
  write_file(out_path, text);
  out << "labeled " << cases.size() << " cases\n";
  return 0;
}

int cmd_train(const RunConfig &cfg, const std::string &resume, bool force,
              bool warmup_only, std::ostream &out) {
  std::vector<std::string> missing;
  require(missing, cfg.data.corpus, "data.corpus");
  require(missing, cfg.data.memory, "data.memory");
  if (cfg.train.checkpoint_every > 0)
    require(missing, cfg.output.checkpoint, "output.checkpoint");
  throw_missing(missing, warmup_only ? "warmup" : "train");

  const Dataset data = load_dataset(cfg, cfg.data.corpus, cfg.data.truth);
  const Model model = make_model(
      cfg.model, Vocab::build(data.cases, data.repo, cfg.model.max_vocab));
  const auto cases =
      prepare_cases(model.vocab, data.cases, data.repo, data.truth_ptr());
  TrainState state =
      resume.empty() ? init_state(model, cfg.seed) : load_state(resume, model);

  LogWriter log(cfg.output.log, !resume.empty(), force);
  TrainOptions opts;
  opts.warmup_only = warmup_only;
  opts.log = [&](const nlohmann::ordered_json &j) { log(j); };
  if (!cfg.output.checkpoint.empty())
    opts.checkpoint = [&](const TrainState &s) {
      const std::string p =
          checkpoint_path_for(cfg.output.checkpoint, s.global_step());
      ensure_parent(p);
      save_checkpoint(p, model, s);
    };
  train(model, cfg.train, cases, state, opts);
  if (!cfg.output.checkpoint.empty()) {
    const std::string p =
        checkpoint_path_for(cfg.output.checkpoint, state.global_step());
    ensure_parent(p);
    save_checkpoint(p, model, state);
    out << "checkpoint: " << p << "\n";
  }
  const auto probe =
      probe_recall(model, state.params,
                   std::span<const PreparedCase>(cases).first(
                       std::min(cfg.train.probe_cases, cases.size())),
                   cfg.train.execution);
  out << "steps: warmup " << state.warmup_step << ", dual " << state.dual_step
      << (state.stopped_early ? " (stopped early)" : "") << "\n";
  for (const auto &[k, v] : probe) out << "recall@1 " << k << ": " << v << "\n";
  return 0;
}

struct LoadedModel {
  Model model;
  ParamSet params;
};

// The checkpoint's model when resuming, otherwise an untrained one.
LoadedModel model_for_eval(const RunConfig &cfg, const std::string &resume,
                           const Dataset &data) {
  LoadedModel lm;
  if (!resume.empty()) {
    const Checkpoint c = read_checkpoint(resume);
    lm.model = make_model(cfg.model, c.vocab);
    lm.params = load_state(resume, lm.model).params;
    return lm;
  }
  std::vector<DialogueCase> vocab_cases = data.cases;
  if (!cfg.data.corpus.empty() && cfg.data.corpus != cfg.data.eval_corpus)
    vocab_cases = load_corpus(cfg.data.corpus);
  lm.model = make_model(
      cfg.model, Vocab::build(vocab_cases, data.repo, cfg.model.max_vocab));
  lm.params = init_state(lm.model, cfg.seed).params;
  return lm;
}

Dataset eval_dataset(const RunConfig &cfg, const std::string &command) {
  std::vector<std::string> missing;
  if (cfg.data.eval_corpus.empty())
    require(missing, cfg.data.corpus, "data.eval_corpus or data.corpus");
  require(missing, cfg.data.memory, "data.memory");
  throw_missing(missing, command);
  const bool own = !cfg.data.eval_corpus.empty();
  Dataset d = load_dataset(cfg, own ? cfg.data.eval_corpus : cfg.data.corpus,
                           own ? cfg.data.eval_truth : cfg.data.truth);
  if (cfg.eval_max_cases > 0 && d.cases.size() > cfg.eval_max_cases)
    d.cases.resize(cfg.eval_max_cases);
  return d;
}

int cmd_eval(const RunConfig &cfg, const std::string &resume, bool m_sweep,
             bool force, std::ostream &out) {
  if (!cfg.output.report.empty()) guard_output(cfg.output.report, force);
  const Dataset data = eval_dataset(cfg, "eval");
  const LoadedModel lm = model_for_eval(cfg, resume, data);
  const auto cases =
      prepare_cases(lm.model.vocab, data.cases, data.repo, data.truth_ptr());

  nlohmann::ordered_json report;
  if (m_sweep) {
    report["m_sweep"] = nlohmann::ordered_json::array();
    out << "m";
    for (std::size_t k : cfg.recall_k) out << "\tR@" << k;
    out << "\n";
    for (std::size_t m = 1; m <= 4; ++m) {
      EvalConfig ec = cfg.eval_config();
      ec.select.m = m;
      ec.generate = false;
      const EvalReport r = evaluate(lm.model, lm.params, cases, ec);
      nlohmann::ordered_json row = r.to_json();
      row["m"] = m;
      report["m_sweep"].push_back(row);
      out << m;
      for (const auto &[k, v] : r.recall) out << "\t" << v;
      out << "\n";
    }
  } else {
    const EvalReport r = evaluate(lm.model, lm.params, cases, cfg.eval_config());
    report = r.to_json();
    if (cfg.eval_generate) out << r.text.format_table();
    for (const auto &[k, v] : r.recall)
      out << "recall@" << k << ": " << v << "\n";
  }
  if (!cfg.output.report.empty()) {
    write_file(cfg.output.report, report.dump(2) + "\n");
    out << "report: " << cfg.output.report << "\n";
  }
  return 0;
}

int cmd_infer(const RunConfig &cfg, const std::string &resume,
              const std::string &case_id, const std::string &user,
              const std::vector<std::string> &context,
              const std::vector<std::string> &knowledge, std::ostream &out) {
  const bool manual = !user.empty() || !context.empty() || !knowledge.empty();
  Dataset data;
  std::vector<std::string> missing;
  require(missing, cfg.data.memory, "data.memory");
  if (!manual && cfg.data.eval_corpus.empty())
    require(missing, cfg.data.corpus, "data.eval_corpus or data.corpus");
  throw_missing(missing, "infer");
  if (manual) {
    if (user.empty() || context.empty() || knowledge.empty())
      throw ConfigError("infer needs --user, --context and --knowledge together");
    data.repo = load_memory(cfg.data.memory);
  } else {
    data = eval_dataset(cfg, "infer");
  }
  const LoadedModel lm = model_for_eval(cfg, resume, data);

  Query q;
  std::string label;
  if (manual) {
    std::vector<Tokens> ctx, know;
    for (const auto &c : context) ctx.push_back(tokenize(c));
    for (const auto &k : knowledge) know.push_back(tokenize(k));
    q = make_query(lm.model.vocab, ctx, user, know, data.repo);
    label = "query";
  } else {
    auto it = std::find_if(
        data.cases.begin(), data.cases.end(),
        [&](const DialogueCase &c) { return case_id.empty() || c.id == case_id; });
    if (it == data.cases.end()) throw DataError("no case with id " + case_id);
    const auto prepared = prepare_cases(lm.model.vocab, {*it}, data.repo);
    q = query_from(prepared.front().enc);
    label = it->id;
  }
  Rng rng = Rng::derive(cfg.seed, 0);
  const Response r = respond(lm.model, lm.params, q, cfg.decode, cfg.select, rng);
  out << "case: " << label << "\n";
  out << "zp:";
  for (std::size_t z : r.zp) out << " " << z;
  out << "\nzk: " << r.zk << "\n";
  out << "response: " << join_tokens(r.words) << "\n";
  return 0;
}

int cmd_selfcheck(std::uint64_t seed, std::ostream &out) {
  bool ok = true;
  double total = 0.0;
  for (const CheckResult &r : run_selfcheck(seed)) {
    ok = ok && r.passed;
    total += r.seconds;
    char secs[32];
    std::snprintf(secs, sizeof(secs), "%.2fs", r.seconds);
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " [" << secs << "] "
        << r.detail << "\n";
  }
  char secs[32];
  std::snprintf(secs, sizeof(secs), "%.2fs", total);
  out << (ok ? "selfcheck passed" : "selfcheck FAILED") << " in " << secs
      << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"pkgc: personal-memory knowledge selection toolkit"};
  app.require_subcommand(1);

  std::string spec_path, out_dir, corpus, memory, out_path, config, resume;
  std::string case_id, user;
  std::vector<std::string> context, knowledge;
  std::optional<std::uint64_t> gen_seed;
  std::uint64_t check_seed = 0;
  bool force = false, m_sweep = false;

  auto *gen = app.add_subcommand("gen-data", "Generate a synthetic corpus");
  gen->add_option("--spec", spec_path, "Synthetic spec file")->required();
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Overrides synthetic.seed");
  gen->add_flag("--force", force, "Overwrite existing files");

  auto *label = app.add_subcommand("label", "Write pseudo labels");
  label->add_option("--corpus", corpus)->required();
  label->add_option("--memory", memory)->required();
  label->add_option("--out", out_path)->required();
  label->add_flag("--force", force);

  std::vector<CLI::App *> run_cmds;
  for (const char *name : {"warmup", "train", "eval", "infer"}) {
    auto *c = app.add_subcommand(name);
    c->add_option("--config", config, "Run config file")->required();
    c->add_option("--resume", resume, "Checkpoint to start from");
    run_cmds.push_back(c);
  }
  run_cmds[0]->description("Run the warm-up phase");
  run_cmds[1]->description("Run warm-up (if needed) and the dual loop");
  run_cmds[2]->description("Evaluate recall and generation metrics");
  run_cmds[3]->description("Respond to one case or query");
  for (int i : {0, 1, 2}) run_cmds[i]->add_flag("--force", force);
  run_cmds[2]->add_flag("--m-sweep", m_sweep,
                        "Selection recall for m = 1..4");
  run_cmds[3]->add_option("--case", case_id, "Case id (default: first)");
  run_cmds[3]->add_option("--user", user, "Memory repository user key");
  run_cmds[3]->add_option("--context", context, "Context utterances");
  run_cmds[3]->add_option("--knowledge", knowledge, "Knowledge candidates");

  auto *check = app.add_subcommand("selfcheck", "Run the oracle suite");
  check->add_option("--seed", check_seed);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorClass::kConfig);
  }

  try {
    if (*gen) return cmd_gen_data(spec_path, out_dir, gen_seed, force, out);
    if (*label) return cmd_label(corpus, memory, out_path, force, out);
    if (*check) return cmd_selfcheck(check_seed, out);
    const RunConfig cfg = config_from(config);
    if (*run_cmds[0]) return cmd_train(cfg, resume, force, true, out);
    if (*run_cmds[1]) return cmd_train(cfg, resume, force, false, out);
    if (*run_cmds[2]) return cmd_eval(cfg, resume, m_sweep, force, out);
    return cmd_infer(cfg, resume, case_id, user, context, knowledge, out);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.error_class());
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorClass::kGeneric);
  }
}

}  // namespace pkgc
