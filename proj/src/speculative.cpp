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

#include "specsched/speculative.hpp"

#include <algorithm>
#include <utility>

#include "specsched/errors.hpp"

namespace specsched {
namespace {

TokenSeq concat(std::span<const TokenId> a, const TokenSeq& b) {
  TokenSeq out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<double> residual_weights(std::span<const double> p, std::span<const double> q) {
  std::vector<double> r(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    r[i] = std::max(0.0, p[i] - q[i]);
    total += r[i];
  }
  if (!(total > 0.0)) return {p.begin(), p.end()};
  for (double& x : r) x /= total;
  return r;
}

double accept_probability(double p, double q) { return std::min(1.0, p / q); }

void check_draft_mass(double q, TokenId token) {
  if (!(q > 0.0)) {
    throw ContractViolation("drafted token " + std::to_string(token) +
                            " has zero draft probability");
  }
}

void check_vocab(const LanguageModel& target, const DraftResult& d) {
  if (!d.conditionals.empty() && d.conditionals.front().size() != target.vocab_size()) {
    throw InputError("draft and target vocabularies differ");
  }
}

}  // namespace

TokenSeq VerifyOutcome::emitted() const {
  TokenSeq out = accepted;
  if (correction) out.push_back(*correction);
  return out;
}

DraftResult draft(const LanguageModel& draft_model, std::span<const TokenId> prefix,
                  const KConfig& kconfig, RngStream& rng) {
  std::vector<CandidateNode> nodes;
  std::vector<TokenSeq> paths;
  std::vector<std::pair<std::size_t, Distribution>> computed;
  std::vector<std::string> warnings;

  std::vector<int> frontier{CandidateTree::kRoot};
  for (std::size_t j = 0; j < kconfig.depth(); ++j) {
    std::vector<int> next;
    for (int parent : frontier) {
      const TokenSeq context =
          parent == CandidateTree::kRoot ? TokenSeq(prefix.begin(), prefix.end())
                                         : concat(prefix, paths[static_cast<std::size_t>(parent)]);
      Distribution dist = draft_model.next_distribution(context);
      std::size_t fanout = kconfig.counts()[j];
      const std::size_t support = dist.support_size();
      if (fanout > support) {
        warnings.push_back("depth " + std::to_string(j + 1) + ": fan-out " +
                           std::to_string(fanout) + " shrunk to support size " +
                           std::to_string(support));
        fanout = support;
      }
      std::vector<double> remaining(dist.probs().begin(), dist.probs().end());
      for (std::size_t c = 0; c < fanout; ++c) {
        const TokenId token = sample_weights(remaining, rng);
        remaining[token] = 0.0;
        TokenSeq path = parent == CandidateTree::kRoot
                            ? TokenSeq{}
                            : paths[static_cast<std::size_t>(parent)];
        path.push_back(token);
        nodes.push_back({token, parent, static_cast<std::uint32_t>(j + 1), dist[token]});
        paths.push_back(std::move(path));
        next.push_back(static_cast<int>(nodes.size() - 1));
      }
      computed.emplace_back(slot_of(parent), std::move(dist));
    }
    frontier = std::move(next);
  }

  DraftResult result;
  result.tree = CandidateTree(std::move(nodes));
  result.conditionals.resize(result.tree.size() + 1);
  for (auto& [slot, dist] : computed) result.conditionals[slot] = std::move(dist);
  result.warnings = std::move(warnings);
  return result;
}

std::vector<Distribution> target_batch(const LanguageModel& target_model,
                                       std::span<const TokenId> prefix,
                                       const CandidateTree& tree) {
  std::vector<Distribution> out(tree.size() + 1);
  out[0] = target_model.next_distribution(prefix);
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree.node(i).depth >= tree.depth()) continue;
    out[i + 1] = target_model.next_distribution(concat(prefix, tree.path_tokens(i)));
  }
  return out;
}

VerifyOutcome verify_chain(const LanguageModel& target_model, std::span<const TokenId> prefix,
                           const DraftResult& d, RngStream& rng) {
  const CandidateTree& tree = d.tree;
  if (tree.size() != tree.depth()) throw InputError("verify_chain requires a chain draft");
  check_vocab(target_model, d);
  const std::vector<Distribution> targets = target_batch(target_model, prefix, tree);

  VerifyOutcome out;
  out.drafted = tree.depth();
  for (std::size_t j = 0; j < tree.size(); ++j) {
    const CandidateNode& node = tree.node(j);
    const std::size_t slot = slot_of(node.parent);
    const Distribution& p = targets[slot];
    const Distribution& q = d.conditionals[slot];
    check_draft_mass(q[node.token], node.token);
    const double u = rng.next_unit();
    if (u < accept_probability(p[node.token], q[node.token])) {
      out.accepted.push_back(node.token);
      continue;
    }
    out.correction = sample_weights(residual_weights(p.probs(), q.probs()), rng);
    break;
  }
  return out;
}

VerifyOutcome verify_tree(const LanguageModel& target_model, std::span<const TokenId> prefix,
                          const DraftResult& d, RngStream& rng) {
  const CandidateTree& tree = d.tree;
  check_vocab(target_model, d);
  const std::vector<Distribution> targets = target_batch(target_model, prefix, tree);

  VerifyOutcome out;
  out.drafted = tree.depth();
  int current = CandidateTree::kRoot;
  for (std::size_t depth = 1; depth <= tree.depth(); ++depth) {
    const std::size_t slot = slot_of(current);
    std::vector<double> p(targets[slot].probs().begin(), targets[slot].probs().end());
    std::vector<double> q(d.conditionals[slot].probs().begin(), d.conditionals[slot].probs().end());
    std::optional<std::size_t> chosen;
    for (std::size_t child : tree.children(current)) {
      const TokenId x = tree.node(child).token;
      check_draft_mass(q[x], x);
      const double u = rng.next_unit();
      if (u < accept_probability(p[x], q[x])) {
        chosen = child;
        break;
      }
      // Rejected: the target moves to the residual, the draft loses x and
      // renormalizes, matching how the next sibling was drawn.
      p = residual_weights(p, q);
      q[x] = 0.0;
      double mass = 0.0;
      for (double v : q) mass += v;
      if (mass > 0.0) {
        for (double& v : q) v /= mass;
      }
    }
    if (!chosen) {
      out.correction = sample_weights(p, rng);
      return out;
    }
    out.accepted.push_back(tree.node(*chosen).token);
    current = static_cast<int>(*chosen);
  }
  return out;
}

VerifyOutcome verify(const LanguageModel& target_model, std::span<const TokenId> prefix,
                     const DraftResult& d, RngStream& rng) {
  if (d.tree.size() == d.tree.depth()) return verify_chain(target_model, prefix, d, rng);
  return verify_tree(target_model, prefix, d, rng);
}

double expected_alpha(const Distribution& target, const Distribution& draft_dist) {
  if (target.size() != draft_dist.size()) {
    throw InputError("expected_alpha over mismatched vocabularies");
  }
  double alpha = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    alpha += std::min(target.probs()[i], draft_dist.probs()[i]);
  }
  return alpha;
}

Distribution residual(const Distribution& target, const Distribution& draft_dist) {
  if (target.size() != draft_dist.size()) throw InputError("residual over mismatched vocabularies");
  return Distribution::normalized(residual_weights(target.probs(), draft_dist.probs()));
}

TokenSeq speculative_generate(const LanguageModel& draft_model,
                              const LanguageModel& target_model,
                              std::span<const TokenId> prefix, std::size_t max_new,
                              const KConfig& kconfig, std::uint64_t seed,
                              std::uint64_t sequence, GenerationStats* stats) {
  if (draft_model.vocab_size() != target_model.vocab_size()) {
    throw InputError("draft and target vocabularies differ");
  }
  RngStream draft_rng(seed, {sequence, Phase::kDraft});
  RngStream verify_rng(seed, {sequence, Phase::kVerify});
  TokenSeq context(prefix.begin(), prefix.end());
  TokenSeq out;
  GenerationStats local;
  while (out.size() < max_new) {
    const DraftResult d = draft(draft_model, context, kconfig, draft_rng);
    const VerifyOutcome o = verify(target_model, context, d, verify_rng);
    const TokenSeq emitted = o.emitted();
    const std::size_t take = std::min(emitted.size(), max_new - out.size());
    out.insert(out.end(), emitted.begin(), emitted.begin() + static_cast<std::ptrdiff_t>(take));
    context.insert(context.end(), emitted.begin(),
                   emitted.begin() + static_cast<std::ptrdiff_t>(take));
    ++local.rounds;
    local.drafted += o.drafted;
    local.accepted += o.accepted_count();
    local.corrections += o.correction ? 1 : 0;
    local.emitted += take;
  }
  if (stats) *stats = local;
  return out;
}

TokenSeq autoregressive_generate(const LanguageModel& model, std::span<const TokenId> prefix,
                                 std::size_t max_new, std::uint64_t seed,
                                 std::uint64_t sequence) {
  RngStream rng(seed, {sequence, Phase::kVerify});
  TokenSeq context(prefix.begin(), prefix.end());
  TokenSeq out;
  for (std::size_t i = 0; i < max_new; ++i) {
    const TokenId t = sample(model.next_distribution(context), rng);
    out.push_back(t);
    context.push_back(t);
  }
  return out;
}

}  // namespace specsched
