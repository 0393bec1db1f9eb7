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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "specsched/errors.hpp"
#include "specsched/trace.hpp"

namespace specsched {

using Tick = std::uint64_t;

// Result of verifying one request, before truncation to the length limit.
struct RoundTally {
  std::size_t emitted = 0;
  std::size_t accepted = 0;
  std::size_t drafted = 0;
  bool corrected = false;
};

// Length-level view of one sequence; token content lives with the executor.
// gamma is the draft label: true while the drafter may draft, false while a
// request of this sequence is queued or being verified.
struct SequenceProgress {
  std::size_t length = 0;
  bool gamma = true;
  bool done = false;
  std::size_t rounds = 0;
};

template <typename Payload>
struct VerifyRequest {
  std::size_t sequence = 0;
  Payload draft;
  std::uint64_t enqueue_seq = 0;
};

// Rounds-scheduled state machine shared by the virtual-time and threaded
// executors: per-sequence progress, the FCFS verify queue and the trace.
// Not synchronized; the threaded runner guards it with one mutex.
template <typename Payload>
class RoundsState {
 public:
  RoundsState(std::size_t n, std::size_t max_len) : progress_(n), max_len_(max_len) {
    if (n == 0) throw ConfigError("need at least one sequence");
    if (max_len == 0) throw ConfigError("max new length must be positive");
  }

  std::size_t size() const { return progress_.size(); }
  std::size_t max_len() const { return max_len_; }
  const SequenceProgress& progress(std::size_t i) const { return progress_.at(i); }
  bool can_draft(std::size_t i) const { return progress_[i].gamma && !progress_[i].done; }
  bool queue_empty() const { return queue_.empty(); }
  std::size_t queue_size() const { return queue_.size(); }

  bool all_done() const {
    for (const auto& p : progress_) {
      if (!p.done) return false;
    }
    return true;
  }

  void begin_draft(Tick t, std::size_t i) {
    if (!can_draft(i)) {
      throw ContractViolation("sequence " + std::to_string(i) + " drafted without its draft label");
    }
    record(t, Actor::kDrafter, EventKind::kDraftStart, i);
  }

  // Draft finished: admit the request to the queue and clear the label.
  std::uint64_t submit(Tick t, std::size_t i, Payload draft) {
    if (!progress_.at(i).gamma) {
      throw ContractViolation("sequence " + std::to_string(i) + " already has a request in flight");
    }
    record(t, Actor::kDrafter, EventKind::kDraftEnd, i);
    const std::uint64_t admission = next_admission_++;
    progress_[i].gamma = false;
    queue_.push_back({i, std::move(draft), admission});
    TraceEvent e = make(t, Actor::kDrafter, EventKind::kEnqueue, i);
    e.request = static_cast<std::int64_t>(admission);
    trace_.record(std::move(e));
    return admission;
  }

  // Pops the head of the queue. Requests for sequences that already reached
  // the length limit are dropped with a warning.
  std::optional<VerifyRequest<Payload>> next_request(Tick t) {
    while (!queue_.empty()) {
      VerifyRequest<Payload> req = std::move(queue_.front());
      queue_.pop_front();
      TraceEvent e = make(t, Actor::kVerifier, EventKind::kDequeue, req.sequence);
      e.request = static_cast<std::int64_t>(req.enqueue_seq);
      trace_.record(std::move(e));
      if (progress_[req.sequence].done) {
        TraceEvent w = make(t, Actor::kVerifier, EventKind::kWarning, req.sequence);
        w.request = static_cast<std::int64_t>(req.enqueue_seq);
        w.message = "dropped request for finished sequence";
        trace_.record(std::move(w));
        ++dropped_;
        continue;
      }
      return req;
    }
    return std::nullopt;
  }

  // Verification finished: extend the sequence (truncating at the limit),
  // then either finish it or hand the draft label back. Returns how many of
  // the emitted tokens were kept.
  std::size_t complete(Tick t, std::size_t i, const RoundTally& tally) {
    SequenceProgress& p = progress_.at(i);
    const std::size_t kept = std::min(tally.emitted, max_len_ - p.length);
    p.length += kept;
    ++p.rounds;
    TraceEvent e = make(t, Actor::kVerifier,
                        tally.corrected ? EventKind::kResampleEnd : EventKind::kVerifyEnd, i);
    e.tokens = kept;
    e.accepted = tally.accepted;
    e.drafted = tally.drafted;
    trace_.record(std::move(e));
    p.gamma = true;
    if (p.length >= max_len_) {
      p.done = true;
      record(t, Actor::kVerifier, EventKind::kSequenceDone, i);
    }
    return kept;
  }

  // Ends a sequence early (e.g. a stop condition outside the length limit).
  // A request it still has queued is dropped when it reaches the head.
  void finish(Tick t, std::size_t i) {
    SequenceProgress& p = progress_.at(i);
    if (p.done) return;
    const bool queued = std::any_of(queue_.begin(), queue_.end(),
                                    [&](const auto& r) { return r.sequence == i; });
    if (!p.gamma && !queued) {
      throw ContractViolation("sequence " + std::to_string(i) +
                              " cannot finish while drafting or under verification");
    }
    p.done = true;
    record(t, Actor::kDriver, EventKind::kSequenceDone, i);
  }

  // Throws when no further progress is possible: unfinished sequences, an
  // empty queue, an idle verifier and no sequence holding its draft label.
  void check_liveness(bool verifier_busy) const {
    if (all_done() || verifier_busy || !queue_.empty()) return;
    for (std::size_t i = 0; i < progress_.size(); ++i) {
      if (can_draft(i)) return;
    }
    throw InvariantViolation(
        "deadlock: unfinished sequences all await verification but the queue is empty");
  }

  std::size_t dropped() const { return dropped_; }
  const ScheduleTrace& trace() const { return trace_; }
  ScheduleTrace take_trace() { return std::move(trace_); }
  void record_warning(Tick t, std::size_t i, std::string message) {
    TraceEvent e = make(t, Actor::kDriver, EventKind::kWarning, i);
    e.message = std::move(message);
    trace_.record(std::move(e));
  }

 private:
  static TraceEvent make(Tick t, Actor actor, EventKind kind, std::size_t i) {
    TraceEvent e;
    e.time = t;
    e.actor = actor;
    e.kind = kind;
    e.sequence = static_cast<std::int64_t>(i);
    return e;
  }
  void record(Tick t, Actor actor, EventKind kind, std::size_t i) {
    trace_.record(make(t, actor, kind, i));
  }

  std::vector<SequenceProgress> progress_;
  std::size_t max_len_;
  std::deque<VerifyRequest<Payload>> queue_;
  std::uint64_t next_admission_ = 0;
  std::size_t dropped_ = 0;
  ScheduleTrace trace_;
};

struct PendingEvent {
  Tick time = 0;
  Actor actor = Actor::kDrafter;
  std::size_t sequence = 0;
  std::uint64_t order = 0;

  // Earliest time first; at equal times the verifier precedes drafters and
  // drafters go by ascending sequence index.
  auto key() const {
    return std::tuple(time, actor == Actor::kVerifier ? 0 : 1, sequence, order);
  }
  friend bool operator<(const PendingEvent& a, const PendingEvent& b) { return a.key() < b.key(); }
};

class EventQueue {
 public:
  void push(Tick time, Actor actor, std::size_t sequence) {
    events_.insert({time, actor, sequence, counter_++});
  }
  std::optional<PendingEvent> pop_next() {
    if (events_.empty()) return std::nullopt;
    PendingEvent e = *events_.begin();
    events_.erase(events_.begin());
    return e;
  }
  bool empty() const { return events_.empty(); }
  std::size_t size() const { return events_.size(); }

 private:
  std::set<PendingEvent> events_;
  std::uint64_t counter_ = 0;
};

// Deterministic single-threaded event loop. The executor supplies content
// and service times:
//   std::pair<Payload, Tick> draft(std::size_t seq);
//   std::pair<RoundTally, Tick> verify(const VerifyRequest<Payload>&);
//   void commit(std::size_t seq, std::size_t kept);
// Returns the makespan in ticks.
template <typename Payload, typename Executor>
Tick run_virtual(RoundsState<Payload>& state, Executor& exec) {
  EventQueue events;
  std::vector<std::optional<Payload>> drafted(state.size());
  std::optional<VerifyRequest<Payload>> in_service;
  RoundTally service_tally;
  Tick now = 0;

  auto start_draft = [&](std::size_t i) {
    state.begin_draft(now, i);
    auto [payload, duration] = exec.draft(i);
    drafted[i] = std::move(payload);
    events.push(now + duration, Actor::kDrafter, i);
  };
  auto try_dispatch = [&] {
    if (in_service) return;
    auto req = state.next_request(now);
    if (!req) return;
    auto [tally, duration] = exec.verify(*req);
    service_tally = tally;
    events.push(now + duration, Actor::kVerifier, req->sequence);
    in_service = std::move(req);
  };

  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.can_draft(i)) start_draft(i);
  }
  while (auto ev = events.pop_next()) {
    now = ev->time;
    if (ev->actor == Actor::kDrafter) {
      state.submit(now, ev->sequence, std::move(*drafted[ev->sequence]));
      drafted[ev->sequence].reset();
    } else {
      const std::size_t i = in_service->sequence;
      in_service.reset();
      const std::size_t kept = state.complete(now, i, service_tally);
      exec.commit(i, kept);
      if (state.can_draft(i)) start_draft(i);
    }
    try_dispatch();
  }
  if (!state.all_done()) {
    state.check_liveness(false);
    throw InvariantViolation("virtual event loop stalled with unfinished sequences");
  }
  return now;
}

}  // namespace specsched
