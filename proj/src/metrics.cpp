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

#include "specsched/metrics.hpp"

#include <cmath>
#include <set>

#include "specsched/errors.hpp"

namespace specsched {

Metrics& Metrics::operator+=(const Metrics& other) {
  *this = make_metrics(tokens_total + other.tokens_total, wall_time + other.wall_time,
                       accepted + other.accepted, drafted + other.drafted);
  return *this;
}

Metrics make_metrics(std::uint64_t tokens, double wall_time, std::uint64_t accepted,
                     std::uint64_t drafted) {
  if (accepted > drafted) throw ContractViolation("accepted tokens exceed drafted tokens");
  if (wall_time < 0.0) throw ContractViolation("negative wall time");
  Metrics m;
  m.tokens_total = tokens;
  m.wall_time = wall_time;
  m.tokens_per_second = wall_time > 0.0 ? static_cast<double>(tokens) / wall_time : 0.0;
  m.accepted = accepted;
  m.drafted = drafted;
  m.alpha = drafted == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(drafted);
  return m;
}

Metrics metrics_from_run(const RunResult& run, ExecutionMode mode) {
  const GenerationStats t = run.totals();
  const double wall = mode == ExecutionMode::kVirtual ? static_cast<double>(run.makespan)
                                                      : run.wall_seconds;
  return make_metrics(t.emitted, wall, t.accepted, t.drafted);
}

Metrics metrics_from_trace(const ScheduleTrace& trace) {
  std::uint64_t tokens = 0, accepted = 0, drafted = 0;
  for (const TraceEvent& e : trace.events()) {
    if (e.kind == EventKind::kVerifyEnd || e.kind == EventKind::kResampleEnd) {
      tokens += e.tokens;
      accepted += e.accepted;
      drafted += e.drafted;
    }
  }
  double wall = 0.0;
  if (!trace.empty()) {
    wall = static_cast<double>(trace.events().back().time - trace.events().front().time);
  }
  return make_metrics(tokens, wall, accepted, drafted);
}

double compute_speedup(const Metrics& measured, const Metrics& baseline) {
  if (!(baseline.tokens_per_second > 0.0)) {
    throw InputError("baseline tokens/s must be positive");
  }
  return measured.tokens_per_second / baseline.tokens_per_second;
}

double round_rate(double value) { return std::round(value * 100.0) / 100.0; }
double round_speedup(double value) { return std::round(value * 1000.0) / 1000.0; }

ComponentSplit component_split(const ScheduleTrace& trace, const std::vector<CallRecord>& calls) {
  std::map<std::uint32_t, ScheduleTrace> per_call;
  for (const TraceEvent& e : trace.events()) per_call[e.call].record(e);

  std::set<std::uint32_t> known;
  ComponentSplit split;
  for (const CallRecord& c : calls) {
    if (!known.insert(c.call).second) {
      throw InputError("duplicate call record " + std::to_string(c.call));
    }
    auto it = per_call.find(c.call);
    if (it == per_call.end()) {
      throw InputError("call " + std::to_string(c.call) + " has no trace events");
    }
    const Metrics m = metrics_from_trace(it->second);
    if (m.tokens_total != c.totals.emitted || m.accepted != c.totals.accepted ||
        m.drafted != c.totals.drafted) {
      throw InputError("call " + std::to_string(c.call) + " counters disagree with the trace");
    }
    (c.component == Component::kThoughtGenerator ? split.thought_generator
                                                 : split.state_evaluator) += m;
    split.total += m;
  }
  for (const auto& [call, events] : per_call) {
    if (!known.contains(call)) {
      throw InputError("trace call " + std::to_string(call) + " missing from the call records");
    }
  }
  return split;
}

}  // namespace specsched
