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

#include "specsched/timing_sim.hpp"

#include <iomanip>
#include <type_traits>
#include <ostream>
#include <variant>

#include "specsched/errors.hpp"

namespace specsched {
namespace {

using NoPayload = std::monostate;

Tick verify_ticks(const TimingParams& p, const RoundTally& t) {
  return p.t_verify + (t.corrected ? p.t_resample : 0);
}

class TimingExecutor {
 public:
  explicit TimingExecutor(const TimingParams& params) : params_(params) {
    samplers_.reserve(params.n);
    for (std::size_t i = 0; i < params.n; ++i) samplers_.emplace_back(params, i);
  }

  std::pair<NoPayload, Tick> draft(std::size_t) {
    return {NoPayload{}, params_.k * params_.t_draft_per_token};
  }
  std::pair<RoundTally, Tick> verify(const VerifyRequest<NoPayload>& req) {
    const RoundTally t = samplers_[req.sequence].next();
    const Tick d = verify_ticks(params_, t);
    busy += d;
    ++rounds;
    return {t, d};
  }
  void commit(std::size_t, std::size_t) {}

  Tick busy = 0;
  std::size_t rounds = 0;

 private:
  const TimingParams& params_;
  std::vector<RoundSampler> samplers_;
};

ScheduleTrace ar_trace(const TimingParams& p, bool overlapped) {
  ScheduleTrace trace;
  for (std::size_t i = 0; i < p.n; ++i) {
    TraceEvent e;
    e.time = overlapped ? p.l * p.t_target_ar : (i + 1) * p.l * p.t_target_ar;
    e.actor = Actor::kVerifier;
    e.kind = EventKind::kSequenceDone;
    e.sequence = static_cast<std::int64_t>(i);
    e.tokens = p.l;
    trace.record(e);
  }
  return trace;
}

void finish(StrategyResult& r, const TimingParams& p) {
  r.target_busy_fraction =
      r.makespan == 0 ? 0.0 : static_cast<double>(r.target_busy) / static_cast<double>(r.makespan);
  r.tokens_per_tick =
      r.makespan == 0 ? 0.0 : static_cast<double>(p.n * p.l) / static_cast<double>(r.makespan);
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kSerial:
      return "serial";
    case Strategy::kSerialSd:
      return "serial-sd";
    case Strategy::kScheduledSd:
      return "scheduled-sd";
    case Strategy::kParallel:
      return "parallel";
  }
  return "serial";
}

Strategy strategy_from_string(const std::string& name) {
  for (Strategy s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown strategy '" + name + "'");
}

void TimingParams::validate() const {
  if (t_draft_per_token == 0 || t_verify == 0 || t_resample == 0 || t_target_ar == 0) {
    throw ConfigError("timing parameters must be positive");
  }
  if (n == 0 || k == 0 || l == 0) throw ConfigError("n, k and l must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
}

RoundSampler::RoundSampler(const TimingParams& params, std::size_t seq)
    : params_(params), rng_(params.seed, {seq, Phase::kTiming}) {}

RoundTally RoundSampler::next() {
  RoundTally t;
  t.drafted = params_.k;
  bool rejected = false;
  for (std::size_t j = 0; j < params_.k; ++j) {
    const double u = rng_.next_unit();
    if (!rejected && u < params_.alpha) {
      ++t.accepted;
    } else {
      rejected = true;
    }
  }
  t.corrected = rejected;
  t.emitted = rejected ? t.accepted + 1 : t.accepted;
  return t;
}

SimulationOutput simulate(Strategy strategy, const TimingParams& p) {
  p.validate();
  SimulationOutput out;
  StrategyResult& r = out.result;
  r.strategy = strategy;
  switch (strategy) {
    case Strategy::kSerial:
      r.makespan = p.n * p.l * p.t_target_ar;
      r.target_busy = r.makespan;
      out.trace = ar_trace(p, false);
      break;
    case Strategy::kParallel:
      r.makespan = p.l * p.t_target_ar;
      r.target_busy = r.makespan;
      r.peak_concurrent_target_instances = p.n;
      out.trace = ar_trace(p, true);
      break;
    case Strategy::kSerialSd: {
      RoundsState<NoPayload> state(p.n, p.l);
      Tick now = 0;
      for (std::size_t i = 0; i < p.n; ++i) {
        RoundSampler sampler(p, i);
        while (!state.progress(i).done) {
          state.begin_draft(now, i);
          now += p.k * p.t_draft_per_token;
          state.submit(now, i, NoPayload{});
          (void)state.next_request(now);
          const RoundTally t = sampler.next();
          now += verify_ticks(p, t);
          r.target_busy += verify_ticks(p, t);
          ++r.rounds;
          state.complete(now, i, t);
        }
      }
      r.makespan = now;
      out.trace = state.take_trace();
      break;
    }
    case Strategy::kScheduledSd: {
      RoundsState<NoPayload> state(p.n, p.l);
      TimingExecutor exec(p);
      r.makespan = run_virtual(state, exec);
      r.target_busy = exec.busy;
      r.rounds = exec.rounds;
      out.trace = state.take_trace();
      break;
    }
  }
  finish(r, p);
  return out;
}

std::vector<SweepRow> sweep(const std::vector<Strategy>& strategies,
                            const std::vector<TimingParams>& grid,
                            const TraceObserver& observer) {
  std::vector<SweepRow> rows;
  rows.reserve(strategies.size() * grid.size());
  for (const TimingParams& p : grid) {
    const Tick serial = simulate(Strategy::kSerial, p).result.makespan;
    for (Strategy s : strategies) {
      SweepRow row;
      row.params = p;
      SimulationOutput out = simulate(s, p);
      if (observer) observer(p, s, out.trace);
      row.result = out.result;
      row.speedup_vs_serial =
          static_cast<double>(serial) / static_cast<double>(row.result.makespan);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<TimingParams> SweepGrid::expand() const {
  auto or_base = [](const auto& values, auto base) {
    using T = std::decay_t<decltype(base)>;
    return values.empty() ? std::vector<T>{base} : std::vector<T>(values.begin(), values.end());
  };
  std::vector<TimingParams> grid;
  for (auto nv : or_base(n, base.n)) {
    for (auto kv : or_base(k, base.k)) {
      for (auto lv : or_base(l, base.l)) {
        for (auto av : or_base(alpha, base.alpha)) {
          for (auto sv : or_base(seeds, base.seed)) {
            TimingParams p = base;
            p.n = nv;
            p.k = kv;
            p.l = lv;
            p.alpha = av;
            p.seed = sv;
            grid.push_back(p);
          }
        }
      }
    }
  }
  return grid;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const SweepRow& row : rows) {
    const TimingParams& p = row.params;
    out << to_string(row.result.strategy) << ',' << p.n << ',' << p.k << ',' << p.l << ','
        << std::fixed << std::setprecision(3) << p.alpha << ',' << p.t_draft_per_token << ','
        << p.t_verify << ',' << p.t_resample << ',' << p.t_target_ar << ',' << p.seed << ','
        << row.result.makespan << ',' << std::setprecision(4) << row.result.target_busy_fraction
        << ',' << row.result.tokens_per_tick << ',' << std::setprecision(3)
        << row.speedup_vs_serial << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace specsched
