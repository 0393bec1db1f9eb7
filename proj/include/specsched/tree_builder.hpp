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
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specsched/candidate_tree.hpp"
#include "specsched/model.hpp"
#include "specsched/scheduler.hpp"
#include "specsched/trace.hpp"

namespace specsched {

struct ModelPair {
  ModelPtr draft;
  ModelPtr target;
};

enum class ValueMode { kScalarToken, kClassifierMap };

// Turns an evaluator response into a score. scalar-token: the first token in
// [digit_base, digit_base + 10) reads as the digit token - digit_base.
// classifier-map: the first token present in `classes` maps to its value.
struct ValueParser {
  ValueMode mode = ValueMode::kScalarToken;
  TokenId digit_base = 0;
  std::map<TokenId, double> classes;
  double default_value = 0.0;

  std::optional<double> parse(std::span<const TokenId> response) const;
};

// Evaluation prompt: instruction tokens, the candidate state, then the
// value slot the evaluator completes.
struct EvalTemplate {
  TokenSeq instruction;
  TokenSeq value_slot;

  TokenSeq build(const TokenSeq& state) const;
};

struct TreeConfig {
  std::size_t steps = 1;    // T, tree depth
  std::size_t thoughts = 1; // n, thoughts per expansion
  std::size_t breadth = 1;  // b, states kept per level
  std::size_t thought_len = 4;
  std::size_t eval_len = 4;
  std::optional<std::size_t> final_length;  // defaults to thought_len
  KConfig kconfig = KConfig::chain(1);
  ExecutionMode mode = ExecutionMode::kVirtual;
  ServiceTimes service;
  std::uint64_t seed = 0;
  EvalTemplate eval_template;
  ValueParser parser;

  void validate() const;
};

struct ReasoningNode {
  std::size_t id = 0;
  int parent = -1;
  std::size_t depth = 0;
  TokenSeq tokens;
  std::optional<double> score;
};

enum class Component { kThoughtGenerator, kStateEvaluator };
std::string to_string(Component c);
Component component_from_string(const std::string& name);

// One scheduler invocation made while building a tree.
struct CallRecord {
  std::uint32_t call = 0;
  Component component = Component::kThoughtGenerator;
  std::size_t level = 0;
  std::size_t sequences = 0;
  std::uint64_t seed = 0;
  std::uint64_t offset = 0;
  std::uint64_t makespan = 0;
  double wall_seconds = 0.0;
  GenerationStats totals;
};

struct TreeResult {
  std::vector<ReasoningNode> nodes;  // nodes[0] is the root
  // Surviving node ids per level; levels[0] = {root}.
  std::vector<std::vector<std::size_t>> levels;
  std::size_t best_leaf = 0;
  TokenSeq final_generation;
  ScheduleTrace trace;
  std::vector<CallRecord> calls;
  std::vector<std::string> warnings;
};

// Replaces the scheduler-backed state evaluator, e.g. with a heuristic.
using StateScorer = std::function<double(const ReasoningNode&)>;

// Seed of the generation call that expands `state`. Keyed on the state's
// tokens, so a node's children do not depend on traversal order.
std::uint64_t expansion_seed(std::uint64_t base, std::span<const TokenId> state);

// Breadth-first tree-of-thoughts construction where every generation and
// evaluation batch runs through the rounds scheduler. Generation calls use
// expansion_seed; evaluation call c uses derive_seed(config.seed, c).
class TreeBuilder {
 public:
  TreeBuilder(ModelPair generator, ModelPair evaluator, TreeConfig config);

  void set_state_scorer(StateScorer scorer) { scorer_ = std::move(scorer); }

  // n children of `node`, each extending it by one thought of thought_len
  // tokens. All n drafters share the node's tokens as prefix.
  std::vector<ReasoningNode> generate_thoughts(const ReasoningNode& node, std::size_t level = 0);

  // Scores every candidate from one evaluator batch with distinct prompts.
  void evaluate_states(std::span<ReasoningNode> candidates, std::size_t level = 0);

  TreeResult build_tree(const TokenSeq& prompt);

  // Calls, trace and warnings accumulated since the last build_tree start.
  const std::vector<CallRecord>& calls() const { return log_.calls; }
  const ScheduleTrace& trace() const { return log_.trace; }

 private:
  struct Log {
    ScheduleTrace trace;
    std::vector<CallRecord> calls;
    std::vector<std::string> warnings;
    std::uint64_t clock = 0;
  };

  RunResult invoke(Component component, std::size_t level, const ModelPair& models,
                   std::vector<TokenSeq> prefixes, std::size_t n, std::size_t length,
                   std::uint64_t seed);

  ModelPair generator_;
  ModelPair evaluator_;
  TreeConfig config_;
  StateScorer scorer_;
  Log log_;
};

// id,parent,depth,score,tokens (tokens space separated, score empty when
// unscored). One line per node after a header.
void write_tree_dump(std::ostream& out, const TreeResult& tree);

}  // namespace specsched
