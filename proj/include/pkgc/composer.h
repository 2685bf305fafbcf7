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

// Encoder input layouts. Every sequence is
//
//   [CLS] <condition segments ...> <candidate segment> [SEP]
//
// with [SEP] closing each segment (and, optionally, each context
// utterance). Segment order per distribution kind:
//
//   kPriorZp   C, P_i
//   kPriorZk   C, P_sel, K_i        (C, K_i with independent latents)
//   kPostZp    C, R, P_i
//   kPostZk    C, R, P_sel, K_i
//   kAuxZp     C, R, K_sel, P_i

#ifndef PKGC_COMPOSER_H_
#define PKGC_COMPOSER_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pkgc/errors.h"
#include "pkgc/vocab.h"

namespace pkgc {

enum class DistKind { kPriorZp, kPriorZk, kPostZp, kPostZk, kAuxZp };

const char *dist_kind_name(DistKind kind);

enum class SegmentRole { kContext, kResponse, kMemory, kKnowledge };

const char *segment_role_name(SegmentRole role);

struct SegmentSpan {
  SegmentRole role;
  // [begin, end) token positions. The closing [SEP] is outside the span;
  // a multi-utterance context span contains its inner separators.
  std::size_t begin;
  std::size_t end;
  bool operator==(const SegmentSpan &) const = default;
};

struct ComposedSequence {
  TokenIds tokens;
  std::vector<SegmentSpan> segments;  // in layout order; last = candidate
  bool truncation_applied = false;

  std::size_t segment_length(SegmentRole role) const;
};

struct ComposerOptions {
  std::size_t max_seq_len = 256;
  std::size_t context_floor = 8;
  bool sep_between_utterances = true;
  bool independent_latents = false;
};

struct ComposeInputs {
  std::span<const TokenIds> context = {};
  std::optional<std::span<const TokenId>> response = {};
  std::optional<std::span<const TokenId>> memory = {};     // P_i or P_sel
  std::optional<std::span<const TokenId>> knowledge = {};  // K_i or K_sel
};

struct CompositionError : Error {
  CompositionError(DistKind kind, SegmentRole missing)
      : Error(ErrorClass::kGeneric,
              std::string("compose ") + dist_kind_name(kind) +
                  ": missing segment " + segment_role_name(missing)) {}
  explicit CompositionError(const std::string &w)
      : Error(ErrorClass::kGeneric, w) {}
};

// Context is truncated from its oldest token first, down to
// opts.context_floor; only then are other segments cut from their ends.
ComposedSequence compose(DistKind kind, const ComposeInputs &in,
                         const ComposerOptions &opts = {});

}  // namespace pkgc

#endif  // PKGC_COMPOSER_H_
