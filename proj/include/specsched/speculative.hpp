// Copyright 2026 The specsched Authors. All Rights Reserved.
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specsched/candidate_tree.hpp"
#include "specsched/distribution.hpp"
#include "specsched/model.hpp"
#include "specsched/rng.hpp"

namespace specsched {

// Conditioning distributions are indexed by slot: slot 0 is the root (the
// prefix alone), slot i + 1 is the context ending at candidate node i.
inline std::size_t slot_of(int parent) {
  return parent < 0 ? 0 : static_cast<std::size_t>(parent) + 1;
}

struct DraftResult {
  CandidateTree tree;
  // Draft-model distribution for every slot that has children; leaf slots
  // hold an empty Distribution.
  std::vector<Distribution> conditionals;
  std::vector<std::string> warnings;

  // Distribution the node's token was drawn from.
  const Distribution& distribution_for(std::size_t node) const {
    return conditionals[slot_of(tree.node(node).parent)];
  }
};

struct VerifyOutcome {
  TokenSeq accepted;
  std::optional<TokenId> correction;
  // Draft positions offered for verification (the tree depth).
  std::size_t drafted = 0;

  std::size_t accepted_count() const { return accepted.size(); }
  std::size_t total_emitted() const { return accepted.size() + (correction ? 1 : 0); }
  TokenSeq emitted() const;
};

// Samples a Cartesian candidate tree breadth-first. Each slot at depth j-1
// draws counts[j] distinct tokens without replacement from its draft
// distribution; fan-out shrinks to the support size when the support is
// smaller, with a warning.
DraftResult draft(const LanguageModel& draft_model, std::span<const TokenId> prefix,
                  const KConfig& kconfig, RngStream& rng);

// Target distributions for every slot in one masked pass: slot contexts are
// the prefix followed by the masked ancestor tokens of each node.
std::vector<Distribution> target_batch(const LanguageModel& target_model,
                                       std::span<const TokenId> prefix,
                                       const CandidateTree& tree);

// Sequential accept/resample over a chain draft.
VerifyOutcome verify_chain(const LanguageModel& target_model, std::span<const TokenId> prefix,
                           const DraftResult& draft, RngStream& rng);

// Recursive rejection over sibling candidates drawn without replacement.
// Reduces to verify_chain, draw for draw, when every count is 1.
VerifyOutcome verify_tree(const LanguageModel& target_model, std::span<const TokenId> prefix,
                          const DraftResult& draft, RngStream& rng);

// verify_chain for chain drafts, verify_tree otherwise.
VerifyOutcome verify(const LanguageModel& target_model, std::span<const TokenId> prefix,
                     const DraftResult& draft, RngStream& rng);

// Sum over x of min(p_t(x), p_d(x)): the per-token acceptance probability.
double expected_alpha(const Distribution& target, const Distribution& draft);

// norm(max(0, p_t - p_d)). Falls back to p_t when the residual has no mass,
// which only happens on rejection events of probability zero.
Distribution residual(const Distribution& target, const Distribution& draft);

struct GenerationStats {
  std::size_t rounds = 0;
  std::size_t drafted = 0;
  std::size_t accepted = 0;
  std::size_t corrections = 0;
  std::size_t emitted = 0;
};

// One sequence of speculative decoding in isolation, using the streams
// (seed, {sequence, kDraft}) and (seed, {sequence, kVerify}). The result has
// exactly max_new tokens; the last round is truncated if it overshoots.
TokenSeq speculative_generate(const LanguageModel& draft_model,
                              const LanguageModel& target_model,
                              std::span<const TokenId> prefix, std::size_t max_new,
                              const KConfig& kconfig, std::uint64_t seed,
                              std::uint64_t sequence, GenerationStats* stats = nullptr);

// Plain autoregressive sampling from one model with (seed, {sequence, kVerify}).
TokenSeq autoregressive_generate(const LanguageModel& model, std::span<const TokenId> prefix,
                                 std::size_t max_new, std::uint64_t seed,
                                 std::uint64_t sequence);

}  // namespace specsched
