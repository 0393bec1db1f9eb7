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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace specsched {

enum class Actor { kDrafter, kVerifier, kDriver };

enum class EventKind {
  kDraftStart,
  kDraftEnd,
  kEnqueue,
  kDequeue,
  kVerifyEnd,
  kResampleEnd,
  kSequenceDone,
  kWarning,
};

// One scheduling event. `time` is virtual ticks in virtual-time runs and
// microseconds since run start in threaded runs; `call` identifies the
// scheduler invocation when several runs share one trace.
struct TraceEvent {
  std::uint64_t time = 0;
  std::uint32_t call = 0;
  Actor actor = Actor::kDriver;
  EventKind kind = EventKind::kWarning;
  std::int64_t sequence = -1;
  // Tokens appended to the validated output (verify-end / resample-end).
  std::uint64_t tokens = 0;
  // FCFS admission number (enqueue / dequeue), -1 otherwise.
  std::int64_t request = -1;
  // Raw verification tally before truncation (verify-end / resample-end).
  std::uint64_t accepted = 0;
  std::uint64_t drafted = 0;
  std::string message;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

class ScheduleTrace {
 public:
  void record(TraceEvent event) { events_.push_back(std::move(event)); }

  // Appends `other`, shifting its times by `time_offset` and relabelling its
  // events with `call`.
  void append(const ScheduleTrace& other, std::uint64_t time_offset, std::uint32_t call);

  const std::vector<TraceEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  std::uint64_t end_time() const { return events_.empty() ? 0 : events_.back().time; }

  // Line-delimited JSON, one event per line.
  void write_jsonl(std::ostream& out) const;
  std::string to_jsonl() const;
  static ScheduleTrace read_jsonl(std::istream& in);
  static ScheduleTrace read_file(const std::filesystem::path& path);

  friend bool operator==(const ScheduleTrace&, const ScheduleTrace&) = default;

 private:
  std::vector<TraceEvent> events_;
};

std::string to_string(Actor actor);
std::string to_string(EventKind kind);
Actor actor_from_string(const std::string& name);
EventKind event_kind_from_string(const std::string& name);

}  // namespace specsched
