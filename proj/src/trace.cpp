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

#include "specsched/trace.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "specsched/errors.hpp"

namespace specsched {
namespace {

using ojson = nlohmann::ordered_json;

constexpr std::pair<EventKind, const char*> kKindNames[] = {
    {EventKind::kDraftStart, "draft-start"},   {EventKind::kDraftEnd, "draft-end"},
    {EventKind::kEnqueue, "enqueue"},          {EventKind::kDequeue, "dequeue"},
    {EventKind::kVerifyEnd, "verify-end"},     {EventKind::kResampleEnd, "resample-end"},
    {EventKind::kSequenceDone, "sequence-done"}, {EventKind::kWarning, "warning"},
};

}  // namespace

std::string to_string(Actor actor) {
  switch (actor) {
    case Actor::kDrafter:
      return "drafter";
    case Actor::kVerifier:
      return "verifier";
    case Actor::kDriver:
      return "driver";
  }
  return "driver";
}

Actor actor_from_string(const std::string& name) {
  if (name == "drafter") return Actor::kDrafter;
  if (name == "verifier") return Actor::kVerifier;
  if (name == "driver") return Actor::kDriver;
  throw InputError("unknown trace actor '" + name + "'");
}

std::string to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "warning";
}

EventKind event_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw InputError("unknown trace event kind '" + name + "'");
}

void ScheduleTrace::append(const ScheduleTrace& other, std::uint64_t time_offset,
                           std::uint32_t call) {
  events_.reserve(events_.size() + other.events_.size());
  for (TraceEvent e : other.events_) {
    e.time += time_offset;
    e.call = call;
    events_.push_back(std::move(e));
  }
}

void ScheduleTrace::write_jsonl(std::ostream& out) const {
  for (const TraceEvent& e : events_) {
    ojson j;
    j["t"] = e.time;
    j["call"] = e.call;
    j["actor"] = to_string(e.actor);
    j["kind"] = to_string(e.kind);
    j["seq"] = e.sequence;
    j["tokens"] = e.tokens;
    if (e.request >= 0) j["req"] = e.request;
    if (e.kind == EventKind::kVerifyEnd || e.kind == EventKind::kResampleEnd) {
      j["accepted"] = e.accepted;
      j["drafted"] = e.drafted;
    }
    if (!e.message.empty()) j["msg"] = e.message;
    out << j.dump() << '\n';
  }
}

std::string ScheduleTrace::to_jsonl() const {
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

ScheduleTrace ScheduleTrace::read_jsonl(std::istream& in) {
  ScheduleTrace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TraceEvent e;
      e.time = j.at("t").get<std::uint64_t>();
      e.call = j.value("call", 0u);
      e.actor = actor_from_string(j.at("actor").get<std::string>());
      e.kind = event_kind_from_string(j.at("kind").get<std::string>());
      e.sequence = j.value("seq", std::int64_t{-1});
      e.tokens = j.value("tokens", std::uint64_t{0});
      e.request = j.value("req", std::int64_t{-1});
      e.accepted = j.value("accepted", std::uint64_t{0});
      e.drafted = j.value("drafted", std::uint64_t{0});
      e.message = j.value("msg", std::string{});
      trace.record(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw InputError("trace line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return trace;
}

ScheduleTrace ScheduleTrace::read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trace file " + path.string());
  return read_jsonl(in);
}

}  // namespace specsched
