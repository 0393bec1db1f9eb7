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

#include "specsched/trace_check.hpp"

#include <deque>
#include <sstream>

namespace specsched {
namespace {

enum class SeqState {
  kIdle,
  kDrafting,
  kDrafted,
  kQueued,
  kVerifying,
  kVerified,
  kDone,
  // Finished while a request was still queued; the request gets dropped.
  kDoneQueued,
};

const char* name(SeqState s) {
  switch (s) {
    case SeqState::kIdle:
      return "idle";
    case SeqState::kDrafting:
      return "drafting";
    case SeqState::kDrafted:
      return "drafted";
    case SeqState::kQueued:
      return "queued";
    case SeqState::kVerifying:
      return "verifying";
    case SeqState::kVerified:
      return "verified";
    case SeqState::kDone:
      return "done";
    case SeqState::kDoneQueued:
      return "done-with-queued-request";
  }
  return "?";
}

struct SeqTrack {
  SeqState state = SeqState::kIdle;
  std::uint64_t drafts = 0;
  std::uint64_t verified = 0;
  std::uint64_t dropped = 0;
};

struct CallTrack {
  std::map<std::int64_t, SeqTrack> sequences;
  std::deque<std::int64_t> queue;
  std::int64_t last_request = -1;
};

}  // namespace

TraceReport validate_trace(const ScheduleTrace& trace) {
  TraceReport report;
  const auto& events = trace.events();
  if (events.empty()) return report;
  report.start = events.front().time;
  report.end = events.back().time;

  std::map<std::uint32_t, CallTrack> calls;
  bool verifier_open = false;
  std::int64_t verifying_seq = -1;
  std::uint32_t verifying_call = 0;
  std::uint64_t open_since = 0;
  std::uint64_t last_close = report.start;
  std::uint64_t prev_time = report.start;

  auto violation = [&](std::size_t index, const std::string& what) {
    std::ostringstream out;
    out << "event " << index << ": " << what;
    report.violations.push_back(out.str());
  };

  for (std::size_t idx = 0; idx < events.size(); ++idx) {
    const TraceEvent& e = events[idx];
    if (e.time < prev_time) violation(idx, "time moves backwards");
    prev_time = e.time;

    const bool first_of_call = !report.calls.contains(e.call);
    CallTrack& call = calls[e.call];
    CallSummary& summary = report.calls[e.call];
    if (first_of_call) summary.start = e.time;
    summary.end = e.time;

    if (e.kind == EventKind::kWarning) {
      // A verifier warning closes a dequeued request that was dropped.
      if (e.actor == Actor::kVerifier && verifier_open && e.sequence == verifying_seq) {
        verifier_open = false;
        report.verifier_busy += e.time - open_since;
        summary.verifier_busy += e.time - open_since;
        last_close = e.time;
        ++summary.dropped;
        ++call.sequences[e.sequence].dropped;
      }
      continue;
    }
    if (e.sequence < 0) {
      violation(idx, "event without a sequence index");
      continue;
    }
    SeqTrack& seq = call.sequences[e.sequence];
    auto expect = [&](std::initializer_list<SeqState> allowed, SeqState next) {
      for (SeqState s : allowed) {
        if (seq.state == s) {
          seq.state = next;
          return;
        }
      }
      violation(idx, "sequence " + std::to_string(e.sequence) + " got " + to_string(e.kind) +
                         " while " + name(seq.state));
      seq.state = next;
    };

    switch (e.kind) {
      case EventKind::kDraftStart:
        // Draft-label safety: drafting is only legal with no request in flight.
        expect({SeqState::kIdle, SeqState::kVerified}, SeqState::kDrafting);
        ++seq.drafts;
        break;
      case EventKind::kDraftEnd:
        expect({SeqState::kDrafting}, SeqState::kDrafted);
        break;
      case EventKind::kEnqueue:
        expect({SeqState::kDrafted}, SeqState::kQueued);
        if (e.request <= call.last_request) violation(idx, "admission numbers not increasing");
        call.last_request = e.request;
        call.queue.push_back(e.request);
        ++summary.requests;
        break;
      case EventKind::kDequeue:
        if (seq.state == SeqState::kDoneQueued) {
          seq.state = SeqState::kDone;
        } else {
          expect({SeqState::kQueued}, SeqState::kVerifying);
        }
        if (call.queue.empty() || call.queue.front() != e.request) {
          violation(idx, "dequeue of request " + std::to_string(e.request) +
                             " breaks FCFS order");
          std::erase(call.queue, e.request);
        } else {
          call.queue.pop_front();
        }
        if (verifier_open) violation(idx, "verifier busy intervals overlap");
        report.verifier_idle += e.time - last_close;
        verifier_open = true;
        verifying_seq = e.sequence;
        verifying_call = e.call;
        open_since = e.time;
        break;
      case EventKind::kVerifyEnd:
      case EventKind::kResampleEnd: {
        expect({SeqState::kVerifying}, SeqState::kVerified);
        if (!verifier_open || verifying_seq != e.sequence || verifying_call != e.call) {
          violation(idx, "verification end without a matching dequeue");
        } else {
          report.verifier_busy += e.time - open_since;
          summary.verifier_busy += e.time - open_since;
        }
        verifier_open = false;
        last_close = e.time;
        if ((e.kind == EventKind::kResampleEnd) != (e.accepted < e.drafted)) {
          violation(idx, "resample flag inconsistent with accepted/drafted tally");
        }
        ++seq.verified;
        ++summary.verified;
        summary.accepted += e.accepted;
        summary.drafted += e.drafted;
        summary.tokens += e.tokens;
        report.accepted += e.accepted;
        report.drafted += e.drafted;
        report.tokens += e.tokens;
        break;
      }
      case EventKind::kSequenceDone:
        if (seq.state == SeqState::kQueued) {
          seq.state = SeqState::kDoneQueued;
        } else {
          expect({SeqState::kVerified, SeqState::kIdle}, SeqState::kDone);
        }
        break;
      case EventKind::kWarning:
        break;
    }
  }

  if (verifier_open) {
    report.violations.push_back("trace ends while the verifier is busy");
  } else {
    report.verifier_idle += report.end - last_close;
  }
  for (auto& [call_id, call] : calls) {
    report.calls[call_id].sequences = call.sequences.size();
    for (const auto& [seq_id, seq] : call.sequences) {
      if (seq.state != SeqState::kDone) {
        report.violations.push_back("call " + std::to_string(call_id) + " sequence " +
                                    std::to_string(seq_id) + " never finished");
      }
      if (seq.drafts != seq.verified + seq.dropped) {
        report.violations.push_back("call " + std::to_string(call_id) + " sequence " +
                                    std::to_string(seq_id) + " drafted " +
                                    std::to_string(seq.drafts) + " rounds but verified " +
                                    std::to_string(seq.verified) + " and dropped " +
                                    std::to_string(seq.dropped));
      }
    }
    if (!call.queue.empty()) {
      report.violations.push_back("call " + std::to_string(call_id) +
                                  " ends with undequeued requests");
    }
  }
  return report;
}

}  // namespace specsched
