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

#include "specsched/tree_builder.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "specsched/errors.hpp"
#include "specsched/rng.hpp"

namespace specsched {

std::optional<double> ValueParser::parse(std::span<const TokenId> response) const {
  for (TokenId t : response) {
    if (mode == ValueMode::kScalarToken) {
      if (t >= digit_base && t < digit_base + 10) return static_cast<double>(t - digit_base);
    } else if (auto it = classes.find(t); it != classes.end()) {
      return it->second;
    }
  }
  return std::nullopt;
}

TokenSeq EvalTemplate::build(const TokenSeq& state) const {
  TokenSeq out = instruction;
  out.insert(out.end(), state.begin(), state.end());
  out.insert(out.end(), value_slot.begin(), value_slot.end());
  return out;
}

void TreeConfig::validate() const {
  if (thoughts == 0) throw ConfigError("thoughts per expansion must be at least 1");
  if (breadth == 0) throw ConfigError("breadth limit must be at least 1");
  if (thought_len == 0 || eval_len == 0) throw ConfigError("generation lengths must be positive");
  if (final_length && *final_length == 0) throw ConfigError("final_length must be positive");
}

std::string to_string(Component c) {
  return c == Component::kThoughtGenerator ? "thought-generator" : "state-evaluator";
}

Component component_from_string(const std::string& name) {
  if (name == "thought-generator") return Component::kThoughtGenerator;
  if (name == "state-evaluator") return Component::kStateEvaluator;
  throw InputError("unknown component '" + name + "'");
}

std::uint64_t expansion_seed(std::uint64_t base, std::span<const TokenId> state) {
  std::uint64_t h = mix64(base ^ 0x7472656573656564ULL);
  for (TokenId t : state) h = mix64(h ^ t);
  return derive_seed(h, state.size());
}

TreeBuilder::TreeBuilder(ModelPair generator, ModelPair evaluator, TreeConfig config)
    : generator_(std::move(generator)), evaluator_(std::move(evaluator)), config_(std::move(config)) {
  config_.validate();
}

RunResult TreeBuilder::invoke(Component component, std::size_t level, const ModelPair& models,
                              std::vector<TokenSeq> prefixes, std::size_t n,
                              std::size_t length, std::uint64_t seed) {
  const auto call = static_cast<std::uint32_t>(log_.calls.size());
  RunConfig rc;
  rc.n = n;
  rc.max_new = length;
  rc.kconfig = config_.kconfig;
  rc.draft_model = models.draft;
  rc.target_model = models.target;
  rc.prefixes = std::move(prefixes);
  rc.mode = config_.mode;
  rc.seed = seed;
  rc.service = config_.service;

  RunResult result;
  try {
    result = run(rc);
  } catch (const std::exception& e) {
    throw InvariantViolation(to_string(component) + " call " + std::to_string(call) +
                             " at level " + std::to_string(level) + ": " + e.what());
  }

  CallRecord record;
  record.call = call;
  record.component = component;
  record.level = level;
  record.sequences = n;
  record.seed = rc.seed;
  record.offset = log_.clock;
  record.makespan = result.makespan;
  record.wall_seconds = result.wall_seconds;
  record.totals = result.totals();
  log_.trace.append(result.trace, log_.clock, call);
  log_.clock += result.makespan;
  log_.calls.push_back(record);
  for (const auto& w : result.warnings) {
    log_.warnings.push_back("call " + std::to_string(call) + ": " + w);
  }
  return result;
}

std::vector<ReasoningNode> TreeBuilder::generate_thoughts(const ReasoningNode& node,
                                                          std::size_t level) {
  if (node.depth >= config_.steps) throw InputError("cannot expand a node at the step limit");
  const RunResult r = invoke(Component::kThoughtGenerator, level, generator_, {node.tokens},
                             config_.thoughts, config_.thought_len,
                             expansion_seed(config_.seed, node.tokens));
  std::vector<ReasoningNode> children;
  children.reserve(r.responses.size());
  for (const TokenSeq& thought : r.responses) {
    ReasoningNode child;
    child.parent = static_cast<int>(node.id);
    child.depth = node.depth + 1;
    child.tokens = node.tokens;
    child.tokens.insert(child.tokens.end(), thought.begin(), thought.end());
    children.push_back(std::move(child));
  }
  return children;
}

void TreeBuilder::evaluate_states(std::span<ReasoningNode> candidates, std::size_t level) {
  if (candidates.empty()) throw InputError("evaluate_states needs at least one candidate");
  if (scorer_) {
    for (ReasoningNode& c : candidates) c.score = scorer_(c);
    return;
  }
  std::vector<TokenSeq> prompts;
  prompts.reserve(candidates.size());
  for (const ReasoningNode& c : candidates) prompts.push_back(config_.eval_template.build(c.tokens));
  const RunResult r = invoke(Component::kStateEvaluator, level, evaluator_, std::move(prompts),
                             candidates.size(), config_.eval_len,
                             derive_seed(config_.seed, log_.calls.size()));
  const CallRecord& record = log_.calls.back();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (auto value = config_.parser.parse(r.responses[i])) {
      candidates[i].score = *value;
      continue;
    }
    candidates[i].score = config_.parser.default_value;
    TraceEvent w;
    w.time = log_.clock;
    w.call = record.call;
    w.actor = Actor::kDriver;
    w.kind = EventKind::kWarning;
    w.sequence = static_cast<std::int64_t>(i);
    w.message = "unparseable evaluator response; using default value";
    log_.trace.record(w);
    log_.warnings.push_back("call " + std::to_string(record.call) + " candidate " +
                            std::to_string(i) + ": unparseable evaluator response");
  }
}

TreeResult TreeBuilder::build_tree(const TokenSeq& prompt) {
  log_ = Log{};
  TreeResult result;
  ReasoningNode root;
  root.tokens = prompt;
  result.nodes.push_back(root);
  result.levels.push_back({0});

  for (std::size_t level = 1; level <= config_.steps; ++level) {
    std::vector<ReasoningNode> candidates;
    for (std::size_t parent_id : result.levels.back()) {
      for (ReasoningNode& child : generate_thoughts(result.nodes[parent_id], level)) {
        candidates.push_back(std::move(child));
      }
    }
    evaluate_states(candidates, level);

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    // Stable: equal scores keep creation order (parent order, then thought index).
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return *candidates[a].score > *candidates[b].score;
    });
    const std::size_t keep = std::min(config_.breadth, candidates.size());

    const std::size_t first_id = result.nodes.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      candidates[i].id = first_id + i;
      result.nodes.push_back(candidates[i]);
    }
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < keep; ++i) survivors.push_back(first_id + order[i]);
    result.levels.push_back(std::move(survivors));
  }

  // Survivors are in descending score order, so the front is the arg-max.
  result.best_leaf = result.levels.back().front();
  const RunResult final_run =
      invoke(Component::kThoughtGenerator, config_.steps + 1, generator_,
             {result.nodes[result.best_leaf].tokens}, 1,
             config_.final_length.value_or(config_.thought_len),
             expansion_seed(config_.seed, result.nodes[result.best_leaf].tokens));
  result.final_generation = final_run.responses.front();

  result.trace = log_.trace;
  result.calls = log_.calls;
  result.warnings = log_.warnings;
  return result;
}

void write_tree_dump(std::ostream& out, const TreeResult& tree) {
  out << "id,parent,depth,score,tokens\n";
  for (const ReasoningNode& n : tree.nodes) {
    out << n.id << ',' << n.parent << ',' << n.depth << ',';
    if (n.score) out << std::fixed << std::setprecision(3) << *n.score << std::defaultfloat;
    out << ',';
    for (std::size_t i = 0; i < n.tokens.size(); ++i) {
      if (i) out << ' ';
      out << n.tokens[i];
    }
    out << '\n';
  }
}

}  // namespace specsched
