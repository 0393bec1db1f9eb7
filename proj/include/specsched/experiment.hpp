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

#include "specsched/config.hpp"
#include "specsched/trace_check.hpp"

namespace specsched {

// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "SPECSCHED_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "specsched-out";

struct Cell {
  std::string text;
  bool quoted = true;  // jsonl: string vs raw number/bool
};

Cell cell(const std::string& text);
Cell cell(const char* text);
Cell cell(std::uint64_t value);
Cell cell(double value, int decimals);
Cell cell(bool value);

struct ReportSection {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Report {
  std::vector<ReportSection> sections;

  // table: aligned columns under "== name =="; csv: one header+rows block
  // per section separated by a blank line; jsonl: one object per row with a
  // leading "section" key.
  void write(std::ostream& out, ReportFormat format) const;
  std::string to_string(ReportFormat format) const;
};

struct Monitor {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ExperimentResult {
  Report report;
  std::vector<Monitor> monitors;
  std::vector<std::filesystem::path> files;

  bool passed() const;
};

// Runs the configured mode and writes report.<ext> plus mode artifacts
// (trace.jsonl and tree.csv for tot-run, sweep.csv for timing-sweep) into
// out_dir, which is created if needed.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& out_dir);

// Replays a trace through the validator; one row per scheduler call.
ExperimentResult replay_trace(const ScheduleTrace& trace);

std::string report_extension(ReportFormat format);

}  // namespace specsched
