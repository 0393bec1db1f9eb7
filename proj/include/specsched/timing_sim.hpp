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
#include <string>
#include <vector>

#include "specsched/rng.hpp"
#include "specsched/scheduler_core.hpp"
#include "specsched/trace.hpp"

namespace specsched {

enum class Strategy { kSerial, kSerialSd, kScheduledSd, kParallel };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);
inline constexpr Strategy kAllStrategies[] = {Strategy::kSerial, Strategy::kSerialSd,
                                              Strategy::kScheduledSd, Strategy::kParallel};

// Service times in integer ticks. The defaults are a stand-in preset with
// the draft model three times faster per token than the target; they are
// not measured values.
struct TimingParams {
  Tick t_draft_per_token = 1;
  Tick t_verify = 1;
  Tick t_resample = 1;
  Tick t_target_ar = 3;
  std::size_t n = 1;
  std::size_t k = 1;
  std::size_t l = 1;
  double alpha = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct StrategyResult {
  Strategy strategy = Strategy::kSerial;
  Tick makespan = 0;
  Tick target_busy = 0;
  double target_busy_fraction = 0.0;
  double tokens_per_tick = 0.0;
  std::size_t peak_concurrent_target_instances = 1;
  std::size_t rounds = 0;
};

struct SimulationOutput {
  StrategyResult result;
  ScheduleTrace trace;
};

// Round outcome of sequence `seq`'s r-th verification: k uniforms from
// stream (seed, {seq, kTiming}) are consumed per round whatever the outcome;
// the accepted count is the number of leading uniforms below alpha. Shared
// by serial-sd and scheduled-sd (common random numbers).
class RoundSampler {
 public:
  RoundSampler(const TimingParams& params, std::size_t seq);
  RoundTally next();

 private:
  const TimingParams& params_;
  RngStream rng_;
};

SimulationOutput simulate(Strategy strategy, const TimingParams& params);

struct SweepRow {
  TimingParams params;
  StrategyResult result;
  double speedup_vs_serial = 0.0;
};

using TraceObserver =
    std::function<void(const TimingParams&, Strategy, const ScheduleTrace&)>;

// One row per (grid point, strategy), grid-major. `observer`, if set, sees
// every simulated trace.
std::vector<SweepRow> sweep(const std::vector<Strategy>& strategies,
                            const std::vector<TimingParams>& grid,
                            const TraceObserver& observer = {});

// Cartesian grid over the listed values; empty lists keep `base`'s value.
struct SweepGrid {
  TimingParams base;
  std::vector<std::size_t> n;
  std::vector<std::size_t> k;
  std::vector<std::size_t> l;
  std::vector<double> alpha;
  std::vector<std::uint64_t> seeds;

  std::vector<TimingParams> expand() const;
};

inline constexpr const char* kSweepCsvHeader =
    "strategy,n,k,l,alpha,t_draft_per_token,t_verify,t_resample,t_target_ar,seed,"
    "makespan,busy_fraction,tokens_per_tick,speedup_vs_serial";

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace specsched
