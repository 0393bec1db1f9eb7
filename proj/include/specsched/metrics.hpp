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

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "specsched/scheduler.hpp"
#include "specsched/trace.hpp"
#include "specsched/tree_builder.hpp"

namespace specsched {

struct Metrics {
  std::uint64_t tokens_total = 0;
  double wall_time = 0.0;  // seconds or virtual ticks
  double tokens_per_second = 0.0;
  std::uint64_t accepted = 0;
  std::uint64_t drafted = 0;
  double alpha = 0.0;
  std::optional<double> speedup;

  Metrics& operator+=(const Metrics& other);
};

// Fills tokens_per_second and alpha from the counters.
Metrics make_metrics(std::uint64_t tokens, double wall_time, std::uint64_t accepted,
                     std::uint64_t drafted);

// From the scheduler's own per-sequence statistics. Virtual runs use the
// makespan in ticks, threaded runs the wall clock in seconds.
Metrics metrics_from_run(const RunResult& run, ExecutionMode mode);

// Reduction over raw trace events: tokens, accepted and drafted from
// verify-end / resample-end records, wall time from the first to last event.
Metrics metrics_from_trace(const ScheduleTrace& trace);

// measured.tokens_per_second / baseline.tokens_per_second.
double compute_speedup(const Metrics& measured, const Metrics& baseline);

// Presentation rounding: 2 decimals for rates, 3 for speedups.
double round_rate(double value);
double round_speedup(double value);

struct ComponentSplit {
  Metrics thought_generator;
  Metrics state_evaluator;
  Metrics total;
};

// Attributes every call in a tot-run trace to its component using the call
// records. Throws InputError when the trace and the records disagree.
ComponentSplit component_split(const ScheduleTrace& trace, const std::vector<CallRecord>& calls);

}  // namespace specsched
