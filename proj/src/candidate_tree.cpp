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

#include "specsched/candidate_tree.hpp"

#include <algorithm>
#include <sstream>

#include "specsched/errors.hpp"

namespace specsched {

KConfig::KConfig(std::vector<std::uint32_t> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw InputError("k_config needs at least one position");
  for (auto c : counts_) {
    if (c == 0) throw InputError("k_config entries must be positive");
  }
}

KConfig KConfig::chain(std::size_t k) { return KConfig(std::vector<std::uint32_t>(k, 1)); }

bool KConfig::is_chain() const {
  return std::all_of(counts_.begin(), counts_.end(), [](auto c) { return c == 1; });
}

std::size_t KConfig::node_count() const {
  std::size_t total = 0;
  std::size_t level = 1;
  for (auto c : counts_) {
    level *= c;
    total += level;
  }
  return total;
}

std::string KConfig::to_string() const {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (i) out << ',';
    out << counts_[i];
  }
  out << ')';
  return out.str();
}

CandidateTree::CandidateTree(std::vector<CandidateNode> nodes) : nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  mask_.assign(n * n, false);
  for (std::size_t r = 0; r < n; ++r) {
    const CandidateNode& node = nodes_[r];
    if (node.parent == kRoot) {
      if (node.depth != 1) throw InputError("root children must have depth 1");
    } else {
      if (node.parent < 0 || static_cast<std::size_t>(node.parent) >= r) {
        throw InputError("candidate nodes must be in breadth-first order");
      }
      const auto p = static_cast<std::size_t>(node.parent);
      if (nodes_[p].depth + 1 != node.depth) throw InputError("inconsistent candidate depth");
      // Ancestors of r are p and p's ancestors; p's row is already final.
      for (std::size_t c = 0; c < r; ++c) mask_[r * n + c] = mask_[p * n + c];
    }
    mask_[r * n + r] = true;
    depth_ = std::max<std::size_t>(depth_, node.depth);
  }
}

std::vector<std::size_t> CandidateTree::children(int parent) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].parent == parent) out.push_back(i);
  }
  return out;
}

TokenSeq CandidateTree::path_tokens(std::size_t node) const {
  const std::size_t n = nodes_.size();
  std::vector<std::size_t> on_path;
  for (std::size_t c = 0; c < n; ++c) {
    if (mask_[node * n + c]) on_path.push_back(c);
  }
  std::sort(on_path.begin(), on_path.end(),
            [&](std::size_t a, std::size_t b) { return nodes_[a].depth < nodes_[b].depth; });
  TokenSeq tokens;
  tokens.reserve(on_path.size());
  for (std::size_t c : on_path) tokens.push_back(nodes_[c].token);
  return tokens;
}

}  // namespace specsched
