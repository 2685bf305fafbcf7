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

#include "pkgc/composer.h"

#include <algorithm>
#include <deque>

namespace pkgc {

const char *dist_kind_name(DistKind kind) {
  switch (kind) {
    case DistKind::kPriorZp: return "PRIOR_ZP";
    case DistKind::kPriorZk: return "PRIOR_ZK";
    case DistKind::kPostZp: return "POST_ZP";
    case DistKind::kPostZk: return "POST_ZK";
    case DistKind::kAuxZp: return "AUX_ZP";
  }
  return "?";
}

const char *segment_role_name(SegmentRole role) {
  switch (role) {
    case SegmentRole::kContext: return "context";
    case SegmentRole::kResponse: return "response";
    case SegmentRole::kMemory: return "memory";
    case SegmentRole::kKnowledge: return "knowledge";
  }
  return "?";
}

std::size_t ComposedSequence::segment_length(SegmentRole role) const {
  std::size_t n = 0;
  for (const auto &s : segments)
    if (s.role == role) n += s.end - s.begin;
  return n;
}

namespace {

std::vector<SegmentRole> layout(DistKind kind, bool independent) {
  using R = SegmentRole;
  switch (kind) {
    case DistKind::kPriorZp: return {R::kContext, R::kMemory};
    case DistKind::kPriorZk:
      if (independent) return {R::kContext, R::kKnowledge};
      return {R::kContext, R::kMemory, R::kKnowledge};
    case DistKind::kPostZp: return {R::kContext, R::kResponse, R::kMemory};
    case DistKind::kPostZk:
      return {R::kContext, R::kResponse, R::kMemory, R::kKnowledge};
    case DistKind::kAuxZp:
      return {R::kContext, R::kResponse, R::kKnowledge, R::kMemory};
  }
  return {};
}

}  // namespace

ComposedSequence compose(DistKind kind, const ComposeInputs &in,
                         const ComposerOptions &opts) {
  const auto roles = layout(kind, opts.independent_latents);

  // Context as a queue of non-empty utterances so the oldest tokens can be
  // dropped from the front.
  std::deque<std::deque<TokenId>> ctx;
  for (const auto &u : in.context)
    if (!u.empty()) ctx.emplace_back(u.begin(), u.end());
  if (ctx.empty()) throw CompositionError(kind, SegmentRole::kContext);

  // Non-context segments in layout order.
  struct Seg {
    SegmentRole role;
    TokenIds tokens;
  };
  std::vector<Seg> segs;
  for (SegmentRole r : roles) {
    if (r == SegmentRole::kContext) continue;
    const std::optional<std::span<const TokenId>> *src = nullptr;
    if (r == SegmentRole::kResponse) src = &in.response;
    if (r == SegmentRole::kMemory) src = &in.memory;
    if (r == SegmentRole::kKnowledge) src = &in.knowledge;
    if (!src->has_value() || (*src)->empty()) throw CompositionError(kind, r);
    segs.push_back({r, TokenIds((*src)->begin(), (*src)->end())});
  }

  std::size_t ctx_tokens = 0;
  for (const auto &u : ctx) ctx_tokens += u.size();
  auto total_len = [&]() {
    std::size_t n = 1 + ctx_tokens;
    n += opts.sep_between_utterances ? ctx.size() : 1;
    for (const auto &s : segs) n += s.tokens.size() + 1;
    return n;
  };

  bool truncated = false;
  auto drop_oldest_context_token = [&]() {
    ctx.front().pop_front();
    if (ctx.front().empty()) ctx.pop_front();
    --ctx_tokens;
    truncated = true;
  };

  const std::size_t floor = std::max<std::size_t>(opts.context_floor, 1);
  while (total_len() > opts.max_seq_len && ctx_tokens > floor)
    drop_oldest_context_token();

  // Response, then the condition segment, then the candidate.
  if (total_len() > opts.max_seq_len) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < segs.size(); ++i)
      if (segs[i].role == SegmentRole::kResponse) order.push_back(i);
    for (std::size_t i = 0; i + 1 < segs.size(); ++i)
      if (segs[i].role != SegmentRole::kResponse) order.push_back(i);
    order.push_back(segs.size() - 1);
    for (std::size_t i : order) {
      while (total_len() > opts.max_seq_len && segs[i].tokens.size() > 1) {
        segs[i].tokens.pop_back();
        truncated = true;
      }
    }
  }
  while (total_len() > opts.max_seq_len && ctx_tokens > 1)
    drop_oldest_context_token();
  if (total_len() > opts.max_seq_len)
    throw CompositionError("compose: max_seq_len " +
                           std::to_string(opts.max_seq_len) +
                           " cannot fit one token per segment");

  ComposedSequence out;
  out.truncation_applied = truncated;
  out.tokens.reserve(total_len());
  out.tokens.push_back(kCls);
  {
    const std::size_t begin = out.tokens.size();
    for (std::size_t u = 0; u < ctx.size(); ++u) {
      out.tokens.insert(out.tokens.end(), ctx[u].begin(), ctx[u].end());
      if (opts.sep_between_utterances && u + 1 < ctx.size())
        out.tokens.push_back(kSep);
    }
    out.segments.push_back({SegmentRole::kContext, begin, out.tokens.size()});
    out.tokens.push_back(kSep);
  }
  for (const auto &s : segs) {
    const std::size_t begin = out.tokens.size();
    out.tokens.insert(out.tokens.end(), s.tokens.begin(), s.tokens.end());
    out.segments.push_back({s.role, begin, out.tokens.size()});
    out.tokens.push_back(kSep);
  }
  return out;
}

}  // namespace pkgc
