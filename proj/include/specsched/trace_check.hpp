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
#include <string>
#include <utility>
#include <vector>

#include "specsched/trace.hpp"

namespace specsched {

struct CallSummary {
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  std::uint64_t requests = 0;
  std::uint64_t verified = 0;
  std::uint64_t dropped = 0;
  std::uint64_t accepted = 0;
  std::uint64_t drafted = 0;
  std::uint64_t tokens = 0;
  std::uint64_t verifier_busy = 0;
  std::size_t sequences = 0;
};

// Result of replaying a trace through the independent invariant checker.
struct TraceReport {
  std::vector<std::string> violations;
  std::map<std::uint32_t, CallSummary> calls;
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  // Verifier busy time is the sum of [dequeue, end] intervals; idle time is
  // summed from the gaps around them.
  std::uint64_t verifier_busy = 0;
  std::uint64_t verifier_idle = 0;
  std::uint64_t accepted = 0;
  std::uint64_t drafted = 0;
  std::uint64_t tokens = 0;

  bool ok() const { return violations.empty(); }
  std::uint64_t span() const { return end - start; }
  double alpha() const {
    return drafted == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(drafted);
  }
};

// Checks, per scheduler call: monotone time, FCFS dequeue order, disjoint
// verifier busy intervals, per-sequence round alternation (which includes
// draft-label safety: no draft-start while a request is queued or being
// verified) and liveness (every sequence finishes, one verification per
// draft round).
TraceReport validate_trace(const ScheduleTrace& trace);

}  // namespace specsched
