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

#include "specsched/candidate_tree.hpp"
#include "specsched/model.hpp"
#include "specsched/scheduler_core.hpp"
#include "specsched/speculative.hpp"
#include "specsched/trace.hpp"

namespace specsched {

enum class ExecutionMode { kVirtual, kThreaded };

std::string to_string(ExecutionMode mode);
ExecutionMode execution_mode_from_string(const std::string& name);

// Virtual-time service costs. A draft round of depth k takes
// k * draft_per_token; verification takes `verify`, plus `resample` when the
// round ends in a correction.
struct ServiceTimes {
  Tick draft_per_token = 1;
  Tick verify = 1;
  Tick resample = 1;
};

struct RunConfig {
  std::size_t n = 1;
  std::size_t max_new = 1;
  KConfig kconfig = KConfig::chain(1);
  ModelPtr draft_model;
  ModelPtr target_model;
  // One prefix per sequence, or a single prefix shared by all n.
  std::vector<TokenSeq> prefixes;
  ExecutionMode mode = ExecutionMode::kVirtual;
  std::uint64_t seed = 0;
  ServiceTimes service;
  // Optional per-sequence override of service.draft_per_token.
  std::vector<Tick> draft_ticks_per_token;
};

struct RunResult {
  std::vector<TokenSeq> responses;
  ScheduleTrace trace;
  std::vector<GenerationStats> stats;
  std::vector<std::string> warnings;
  // Ticks in virtual mode, microseconds in threaded mode.
  std::uint64_t makespan = 0;
  std::uint64_t verifier_busy = 0;
  double wall_seconds = 0.0;

  std::size_t requests_verified() const;
  GenerationStats totals() const;
};

// n drafters feeding one FCFS verify queue drained by a single verifier.
// Sequence i draws from streams (seed, {i, kDraft}) and (seed, {i, kVerify}),
// so every response equals speculative_generate(..., seed, i) regardless of
// mode or interleaving.
RunResult run(const RunConfig& config);

}  // namespace specsched
