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

#include "pkgc/corpus.h"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pkgc/errors.h"
#include "pkgc/metrics.h"

namespace pkgc {

using ordered_json = nlohmann::ordered_json;

Tokens tokenize(std::string_view text, const TokenizerOptions &opts) {
  Tokens out;
  std::string cur;
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    if (opts.strip_punctuation && std::ispunct(uc)) continue;
    cur.push_back(opts.lowercase ? static_cast<char>(std::tolower(uc)) : ch);
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join_tokens(const Tokens &tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s.push_back(' ');
    s += tokens[i];
  }
  return s;
}

std::size_t DialogueCase::context_length() const {
  std::size_t n = 0;
  for (const auto &u : context) n += u.size();
  return n;
}

void validate_case(const DialogueCase &c) {
  if (c.context.empty()) throw DataError("case " + c.id + ": empty context");
  if (c.knowledge.empty())
    throw DataError("case " + c.id + ": empty knowledge set");
  if (c.response.empty()) throw DataError("case " + c.id + ": empty response");
  for (const auto &u : c.context)
    if (u.empty()) throw DataError("case " + c.id + ": empty utterance");
  for (const auto &k : c.knowledge)
    if (k.empty())
      throw DataError("case " + c.id + ": empty knowledge candidate");
}

std::string hash_user_key(std::string_view account_name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : account_name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

// Calls fn(line_number, line) for every non-blank line.
template <typename Fn>
void for_each_line(std::string_view text, Fn &&fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    bool blank = true;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) blank = false;
    if (!blank) fn(line_no, line);
    pos = end + 1;
  }
}

ordered_json parse_line(std::string_view line, std::size_t line_no) {
  try {
    auto j = ordered_json::parse(line);
    if (!j.is_object()) throw ParseError("record is not an object", line_no);
    return j;
  } catch (const ordered_json::parse_error &e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
  }
}

const ordered_json &field(const ordered_json &j, const char *name,
                          std::size_t line_no) {
  auto it = j.find(name);
  if (it == j.end())
    throw ParseError(std::string("missing field \"") + name + "\"", line_no);
  return *it;
}

std::string string_field(const ordered_json &j, const char *name,
                         std::size_t line_no) {
  const auto &v = field(j, name, line_no);
  if (!v.is_string())
    throw ParseError(std::string("field \"") + name + "\" must be a string",
                     line_no);
  return v.get<std::string>();
}

Tokens text_field(const ordered_json &j, const char *name,
                  std::size_t line_no, const TokenizerOptions &opts) {
  Tokens t = tokenize(string_field(j, name, line_no), opts);
  if (t.empty())
    throw ParseError(std::string("field \"") + name +
                         "\" is empty after tokenization",
                     line_no);
  return t;
}

std::vector<Tokens> text_list_field(const ordered_json &j, const char *name,
                                    std::size_t line_no,
                                    const TokenizerOptions &opts) {
  const auto &v = field(j, name, line_no);
  if (!v.is_array() || v.empty())
    throw ParseError(
        std::string("field \"") + name + "\" must be a non-empty array",
        line_no);
  std::vector<Tokens> out;
  for (const auto &item : v) {
    if (!item.is_string())
      throw ParseError(
          std::string("field \"") + name + "\" must contain strings", line_no);
    Tokens t = tokenize(item.get<std::string>(), opts);
    if (t.empty())
      throw ParseError(std::string("field \"") + name +
                           "\" has an entry empty after tokenization",
                       line_no);
    out.push_back(std::move(t));
  }
  return out;
}

ordered_json tokens_array(const std::vector<Tokens> &seqs) {
  ordered_json a = ordered_json::array();
  for (const auto &s : seqs) a.push_back(join_tokens(s));
  return a;
}

}  // namespace

std::vector<DialogueCase> parse_corpus(std::string_view text,
                                       const TokenizerOptions &opts) {
  std::vector<DialogueCase> cases;
  for_each_line(text, [&](std::size_t n, std::string_view line) {
    const auto j = parse_line(line, n);
    DialogueCase c;
    c.id = string_field(j, "id", n);
    c.user_key = string_field(j, "user", n);
    c.context = text_list_field(j, "context", n, opts);
    c.knowledge = text_list_field(j, "knowledge", n, opts);
    c.response = text_field(j, "response", n, opts);
    cases.push_back(std::move(c));
  });
  if (cases.empty()) throw DataError("empty corpus");
  return cases;
}

std::vector<DialogueCase> load_corpus(const std::string &path,
                                      const TokenizerOptions &opts) {
  return parse_corpus(read_file(path), opts);
}

MemoryRepository parse_memory(std::string_view text,
                              const TokenizerOptions &opts) {
  MemoryRepository repo;
  for_each_line(text, [&](std::size_t n, std::string_view line) {
    const auto j = parse_line(line, n);
    const std::string user = string_field(j, "user", n);
    const auto &mem = field(j, "memory", n);
    if (!mem.is_array())
      throw ParseError("field \"memory\" must be an array", n);
    auto &frags = repo.entries[user];
    for (const auto &item : mem) {
      if (!item.is_string())
        throw ParseError("field \"memory\" must contain strings", n);
      Tokens t = tokenize(item.get<std::string>(), opts);
      // Fragments that tokenize to nothing carry no signal; the length
      // filter would drop them anyway.
      if (!t.empty()) frags.push_back(std::move(t));
    }
  });
  return repo;
}

MemoryRepository load_memory(const std::string &path,
                             const TokenizerOptions &opts) {
  return parse_memory(read_file(path), opts);
}

std::vector<TruthRecord> load_truth(const std::string &path) {
  std::vector<TruthRecord> out;
  for_each_line(read_file(path), [&](std::size_t n, std::string_view line) {
    const auto j = parse_line(line, n);
    TruthRecord r;
    r.id = string_field(j, "id", n);
    const auto &zp = field(j, "zp", n);
    const auto &zk = field(j, "zk", n);
    if (!zp.is_number_unsigned() || !zk.is_number_unsigned())
      throw ParseError("fields \"zp\"/\"zk\" must be non-negative integers",
                       n);
    r.zp = zp.get<std::size_t>();
    r.zk = zk.get<std::size_t>();
    out.push_back(std::move(r));
  });
  return out;
}

std::string format_corpus(const std::vector<DialogueCase> &cases) {
  std::string out;
  for (const auto &c : cases) {
    ordered_json j;
    j["id"] = c.id;
    j["user"] = c.user_key;
    j["context"] = tokens_array(c.context);
    j["knowledge"] = tokens_array(c.knowledge);
    j["response"] = join_tokens(c.response);
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::string format_memory(const MemoryRepository &repo) {
  std::string out;
  for (const auto &[user, frags] : repo.entries) {
    ordered_json j;
    j["user"] = user;
    j["memory"] = tokens_array(frags);
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::string format_truth(const std::vector<TruthRecord> &truth) {
  std::string out;
  for (const auto &t : truth) {
    ordered_json j;
    j["id"] = t.id;
    j["zp"] = t.zp;
    j["zk"] = t.zk;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

void write_corpus(const std::string &path,
                  const std::vector<DialogueCase> &cases) {
  write_file(path, format_corpus(cases));
}

void write_memory(const std::string &path, const MemoryRepository &repo) {
  write_file(path, format_memory(repo));
}

void write_truth(const std::string &path,
                 const std::vector<TruthRecord> &truth) {
  write_file(path, format_truth(truth));
}

MemoryRepository filter_repository(const MemoryRepository &repo,
                                   const FilterOptions &opts) {
  MemoryRepository out;
  for (const auto &[user, frags] : repo.entries) {
    std::vector<Tokens> kept;
    for (const auto &f : frags)
      if (f.size() >= opts.min_len && f.size() <= opts.max_len)
        kept.push_back(f);
    if (kept.size() >= opts.min_fragments) out.entries[user] = std::move(kept);
  }
  return out;
}

MemorySet retrieve_memory(const MemoryRepository &repo,
                          const std::string &user_key) {
  auto it = repo.entries.find(user_key);
  if (it == repo.entries.end()) throw MissingUserError(user_key);
  return MemorySet{it->second};
}

namespace {

std::size_t argmax_similarity(const std::vector<Tokens> &cands,
                              const Tokens &response, const Similarity &sim) {
  std::size_t best = 0;
  double best_score = sim(cands[0], response);
  for (std::size_t i = 1; i < cands.size(); ++i) {
    const double s = sim(cands[i], response);
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

}  // namespace

PseudoLabels pseudo_labels(const DialogueCase &c, const MemorySet &mem,
                           const Similarity &sim) {
  if (c.knowledge.empty() || mem.fragments.empty())
    throw ArgumentError("pseudo_labels needs non-empty candidate sets");
  PseudoLabels out;
  out.k_bar = argmax_similarity(c.knowledge, c.response, sim);
  out.p_bar = argmax_similarity(mem.fragments, c.response, sim);
  return out;
}

PseudoLabels pseudo_labels(const DialogueCase &c, const MemorySet &mem) {
  return pseudo_labels(c, mem, [](const Tokens &a, const Tokens &b) {
    return unigram_f1(a, b);
  });
}

}  // namespace pkgc
