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

// Test-only models and oracles. The oracles work on plain vectors and do not
// call into the sampling or verification code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "specsched/candidate_tree.hpp"
#include "specsched/model.hpp"
#include "specsched/rng.hpp"
#include "specsched/speculative.hpp"
#include "specsched/tree_builder.hpp"

namespace specsched::testing {

// Context-dependent random model: weights are a hash of (seed, context).
// Roughly `zero_fraction` of the entries are zero, never all of them.
class HashModel final : public LanguageModel {
 public:
  HashModel(std::size_t vocab, std::uint64_t seed, double zero_fraction = 0.0,
            double temperature = 1.0)
      : LanguageModel(vocab, temperature, kDefaultMaxContext),
        seed_(seed),
        zero_fraction_(zero_fraction) {}

 protected:
  std::vector<double> raw_weights(std::span<const TokenId> context) const override {
    std::uint64_t h = mix64(seed_);
    for (TokenId t : context) h = mix64(h ^ (t + 0x9e37ULL));
    std::vector<double> w(vocab_size());
    bool any = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::uint64_t a = mix64(h + 2 * i + 1);
      const double u = static_cast<double>(a >> 11) * 0x1.0p-53;
      const double z = static_cast<double>(mix64(a) >> 11) * 0x1.0p-53;
      w[i] = z < zero_fraction_ ? 0.0 : 0.05 + u * u * 3.0;
      any = any || w[i] > 0.0;
    }
    if (!any) w[h % w.size()] = 1.0;
    return w;
  }

 private:
  std::uint64_t seed_;
  double zero_fraction_;
};

inline std::vector<double> to_vec(const Distribution& d) {
  return std::vector<double>(d.probs().begin(), d.probs().end());
}

inline std::vector<double> renorm(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  if (s > 0.0) {
    for (double& x : v) x /= s;
  }
  return v;
}

// Exact round enumeration of draft-then-verify. Draft: each slot at depth j
// draws counts[j] distinct tokens without replacement (fewer if the support
// is smaller). Verify: siblings are tried in draw order; accept x with
// probability min(1, p(x)/q(x)); after a rejection p <- norm(max(0, p - q))
// and q loses x. A leaf acceptance ends the round with no extra token; if
// every sibling is rejected one correction is drawn from the current p.
// Subtrees are drawn independently, so only the accepted child's subtree is
// expanded.
class RoundEnumerator {
 public:
  using Emit = std::function<void(const TokenSeq& emitted, double mass)>;

  RoundEnumerator(const LanguageModel& draft, const LanguageModel& target, KConfig kconfig)
      : draft_(draft), target_(target), kconfig_(std::move(kconfig)) {}

  void enumerate(const TokenSeq& context, double mass, const Emit& emit) const {
    TokenSeq ctx = context;
    TokenSeq emitted;
    explore(ctx, emitted, 0, mass, emit);
  }

 private:
  void explore(TokenSeq& context, TokenSeq& emitted, std::size_t depth, double mass,
               const Emit& emit) const {
    if (mass == 0.0) return;
    if (depth == kconfig_.depth()) {
      emit(emitted, mass);
      return;
    }
    const std::vector<double> q = to_vec(draft_.next_distribution(context));
    const std::vector<double> p = to_vec(target_.next_distribution(context));
    std::size_t support = 0;
    for (double x : q) support += x > 0.0;
    const std::size_t fan = std::min<std::size_t>(kconfig_.counts()[depth], support);

    std::vector<TokenId> tuple;
    draw_tuple(q, fan, tuple, 1.0, [&](const std::vector<TokenId>& xs, double tuple_prob) {
      std::vector<double> cur_p = p, cur_q = q;
      double reach = mass * tuple_prob;
      for (TokenId x : xs) {
        const double a = std::min(1.0, cur_p[x] / cur_q[x]);
        context.push_back(x);
        emitted.push_back(x);
        explore(context, emitted, depth + 1, reach * a, emit);
        context.pop_back();
        emitted.pop_back();
        reach *= 1.0 - a;
        if (reach == 0.0) return;
        std::vector<double> r(cur_p.size());
        for (std::size_t t = 0; t < r.size(); ++t) r[t] = std::max(0.0, cur_p[t] - cur_q[t]);
        cur_p = renorm(r);
        cur_q[x] = 0.0;
        cur_q = renorm(cur_q);
      }
      for (std::size_t t = 0; t < cur_p.size(); ++t) {
        if (cur_p[t] == 0.0) continue;
        emitted.push_back(static_cast<TokenId>(t));
        emit(emitted, reach * cur_p[t]);
        emitted.pop_back();
      }
    });
  }

  template <typename F>
  static void draw_tuple(const std::vector<double>& q, std::size_t fan,
                         std::vector<TokenId>& tuple, double prob, const F& f) {
    if (tuple.size() == fan) {
      f(tuple, prob);
      return;
    }
    double left = 1.0;
    for (TokenId t : tuple) left -= q[t];
    for (std::size_t t = 0; t < q.size(); ++t) {
      if (q[t] == 0.0 || std::find(tuple.begin(), tuple.end(), t) != tuple.end()) continue;
      tuple.push_back(static_cast<TokenId>(t));
      draw_tuple(q, fan, tuple, prob * q[t] / left, f);
      tuple.pop_back();
    }
  }

  const LanguageModel& draft_;
  const LanguageModel& target_;
  KConfig kconfig_;
};

// Distribution over the first `length` emitted tokens of repeated rounds.
inline std::map<TokenSeq, double> speculative_sequence_distribution(
    const LanguageModel& draft, const LanguageModel& target, const KConfig& kconfig,
    const TokenSeq& prefix, std::size_t length) {
  RoundEnumerator rounds(draft, target, kconfig);
  std::map<TokenSeq, double> done;
  std::map<TokenSeq, double> frontier{{TokenSeq{}, 1.0}};
  while (!frontier.empty()) {
    std::map<TokenSeq, double> next;
    for (const auto& [out, mass] : frontier) {
      TokenSeq ctx = prefix;
      ctx.insert(ctx.end(), out.begin(), out.end());
      rounds.enumerate(ctx, mass, [&](const TokenSeq& emitted, double m) {
        TokenSeq longer = out;
        for (TokenId t : emitted) {
          if (longer.size() == length) break;
          longer.push_back(t);
        }
        (longer.size() == length ? done : next)[longer] += m;
      });
    }
    frontier = std::move(next);
  }
  return done;
}

// Product of target conditionals for every sequence of `length` tokens.
inline std::map<TokenSeq, double> target_sequence_distribution(const LanguageModel& target,
                                                               const TokenSeq& prefix,
                                                               std::size_t length) {
  std::map<TokenSeq, double> cur{{TokenSeq{}, 1.0}};
  for (std::size_t pos = 0; pos < length; ++pos) {
    std::map<TokenSeq, double> next;
    for (const auto& [out, mass] : cur) {
      TokenSeq ctx = prefix;
      ctx.insert(ctx.end(), out.begin(), out.end());
      const std::vector<double> p = to_vec(target.next_distribution(ctx));
      for (std::size_t t = 0; t < p.size(); ++t) {
        if (p[t] == 0.0) continue;
        TokenSeq longer = out;
        longer.push_back(static_cast<TokenId>(t));
        next[longer] += mass * p[t];
      }
    }
    cur = std::move(next);
  }
  return cur;
}

// Largest absolute difference over the union of both supports.
inline double max_abs_difference(const std::map<TokenSeq, double>& a,
                                 const std::map<TokenSeq, double>& b) {
  double worst = 0.0;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    worst = std::max(worst, std::abs(v - (it == b.end() ? 0.0 : it->second)));
  }
  for (const auto& [k, v] : b) {
    if (!a.contains(k)) worst = std::max(worst, std::abs(v));
  }
  return worst;
}

// Ancestor-or-self mask for a Cartesian tree, built by walking parent links
// of nodes laid out breadth-first from the counts.
inline std::vector<std::vector<bool>> ancestor_mask(const std::vector<std::uint32_t>& counts) {
  std::vector<int> parent;
  std::vector<int> level{-1};
  for (std::uint32_t c : counts) {
    std::vector<int> next;
    for (int p : level) {
      for (std::uint32_t j = 0; j < c; ++j) {
        parent.push_back(p);
        next.push_back(static_cast<int>(parent.size()) - 1);
      }
    }
    level = std::move(next);
  }
  const std::size_t n = parent.size();
  std::vector<std::vector<bool>> mask(n, std::vector<bool>(n, false));
  std::function<void(std::size_t, int)> walk = [&](std::size_t row, int node) {
    if (node < 0) return;
    mask[row][static_cast<std::size_t>(node)] = true;
    walk(row, parent[static_cast<std::size_t>(node)]);
  };
  for (std::size_t r = 0; r < n; ++r) walk(r, static_cast<int>(r));
  return mask;
}

// Expected total variation between an empirical histogram of N draws and the
// truth, over m outcomes: about 0.5 * sqrt(2 m / (pi N)).
inline double expected_tv(std::size_t outcomes, std::size_t samples) {
  return 0.5 * std::sqrt(2.0 * static_cast<double>(outcomes) /
                         (3.141592653589793 * static_cast<double>(samples)));
}

struct BfsExpectation {
  TokenSeq best_leaf;
  std::vector<std::size_t> widths;  // surviving states per level, level 1..T
  double best_score = 0.0;
  double global_best = 0.0;         // best over every leaf of the full tree
};

// Brute force over the full candidate tree (n^T leaves). Every state's
// children are isolated serial runs seeded by expansion_seed, so the tree
// exists independently of the search. A leaf is selected when each of its
// ancestors, and the leaf itself, ranks in the top-b of its level among the
// children of the previous level's survivors (ranking: score descending,
// then creation order).
inline BfsExpectation brute_force_bfs(const ModelPair& g, const TreeConfig& cfg,
                                      const TokenSeq& prompt,
                                      const std::function<double(const TokenSeq&)>& score) {
  struct Node {
    TokenSeq tokens;
    std::vector<std::size_t> kids;
  };
  std::vector<Node> nodes{{prompt, {}}};
  std::vector<std::size_t> frontier{0};
  std::vector<std::size_t> leaves;
  for (std::size_t depth = 0; depth < cfg.steps; ++depth) {
    std::vector<std::size_t> next;
    for (std::size_t id : frontier) {
      const TokenSeq state = nodes[id].tokens;
      for (std::size_t i = 0; i < cfg.thoughts; ++i) {
        TokenSeq child = state;
        const TokenSeq t = speculative_generate(*g.draft, *g.target, state, cfg.thought_len,
                                                cfg.kconfig, expansion_seed(cfg.seed, state), i);
        child.insert(child.end(), t.begin(), t.end());
        nodes.push_back({child, {}});
        nodes[id].kids.push_back(nodes.size() - 1);
        next.push_back(nodes.size() - 1);
      }
    }
    frontier = next;
  }
  BfsExpectation out;
  out.global_best = -1e300;
  for (std::size_t id : frontier) out.global_best = std::max(out.global_best, score(nodes[id].tokens));
  if (cfg.steps == 0) out.global_best = 0.0;

  // Every subset of survivors is implied by ranks; compute them level by level.
  std::vector<std::size_t> survivors{0};
  for (std::size_t depth = 0; depth < cfg.steps; ++depth) {
    std::vector<std::size_t> candidates;
    for (std::size_t s : survivors) {
      for (std::size_t k : nodes[s].kids) candidates.push_back(k);
    }
    std::vector<std::pair<std::size_t, double>> ranked;
    for (std::size_t pos = 0; pos < candidates.size(); ++pos) {
      const double sc = score(nodes[candidates[pos]].tokens);
      std::size_t rank = 0;
      for (std::size_t other = 0; other < candidates.size(); ++other) {
        const double so = score(nodes[candidates[other]].tokens);
        rank += so > sc || (so == sc && other < pos);
      }
      ranked.push_back({rank, sc});
    }
    std::vector<std::size_t> kept(std::min(cfg.breadth, candidates.size()));
    for (std::size_t pos = 0; pos < candidates.size(); ++pos) {
      if (ranked[pos].first < kept.size()) kept[ranked[pos].first] = candidates[pos];
    }
    out.widths.push_back(kept.size());
    survivors = kept;
  }
  out.best_leaf = nodes[survivors.front()].tokens;
  out.best_score = cfg.steps == 0 ? 0.0 : score(out.best_leaf);
  return out;
}

}  // namespace specsched::testing
