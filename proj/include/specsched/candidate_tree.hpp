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
#include <string>
#include <vector>

#include "specsched/distribution.hpp"

namespace specsched {

// Per-position candidate counts of a multi-candidate draft. (1, 1, ..., 1)
// is ordinary single-sequence drafting.
class KConfig {
 public:
  explicit KConfig(std::vector<std::uint32_t> counts);
  static KConfig chain(std::size_t k);

  const std::vector<std::uint32_t>& counts() const { return counts_; }
  std::size_t depth() const { return counts_.size(); }
  bool is_chain() const;
  // Sum over depths j of prod_{i<=j} counts[i].
  std::size_t node_count() const;

  std::string to_string() const;

  friend bool operator==(const KConfig&, const KConfig&) = default;

 private:
  std::vector<std::uint32_t> counts_;
};

struct CandidateNode {
  TokenId token = 0;
  int parent = -1;  // CandidateTree::kRoot for depth-1 nodes
  std::uint32_t depth = 1;
  double draft_prob = 0.0;
};

// Draft candidates in breadth-first order plus the tree-attention mask:
// mask(r, c) holds iff c is r or a strict ancestor of r. Siblings are
// contiguous and appear in the order they were drawn.
class CandidateTree {
 public:
  static constexpr int kRoot = -1;

  CandidateTree() = default;
  // Nodes must be breadth-first: every parent precedes its children.
  explicit CandidateTree(std::vector<CandidateNode> nodes);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<CandidateNode>& nodes() const { return nodes_; }
  const CandidateNode& node(std::size_t i) const { return nodes_[i]; }
  std::size_t depth() const { return depth_; }

  bool mask(std::size_t row, std::size_t col) const { return mask_[row * nodes_.size() + col]; }

  // Children of `parent` (kRoot for the first level) in draw order.
  std::vector<std::size_t> children(int parent) const;

  // Tokens on the path root -> node (inclusive), read off the mask row in
  // depth order. This is the attention context of the node.
  TokenSeq path_tokens(std::size_t node) const;

 private:
  std::vector<CandidateNode> nodes_;
  std::vector<bool> mask_;
  std::size_t depth_ = 0;
};

}  // namespace specsched
