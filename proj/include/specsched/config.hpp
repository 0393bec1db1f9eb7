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
#include <optional>
#include <string>
#include <vector>

#include "specsched/candidate_tree.hpp"
#include "specsched/model.hpp"
#include "specsched/scheduler.hpp"
#include "specsched/timing_sim.hpp"
#include "specsched/tree_builder.hpp"

namespace specsched {

inline constexpr int kSchemaVersion = 1;

enum class ExperimentMode { kLosslessness, kTotRun, kTimingSweep };
enum class ReportFormat { kTable, kCsv, kJsonl };

std::string to_string(ExperimentMode mode);
ExperimentMode experiment_mode_from_string(const std::string& name);
std::string to_string(ReportFormat format);
ReportFormat report_format_from_string(const std::string& name);

struct LosslessnessConfig {
  std::size_t samples = 100000;
  std::size_t length = 2;
  double threshold = 0.01;
  TokenSeq prefix;
  KConfig kconfig = KConfig::chain(2);
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ExperimentMode mode = ExperimentMode::kLosslessness;
  std::uint64_t seed = 0;
  ExecutionMode execution = ExecutionMode::kVirtual;

  std::optional<ModelSpec> draft;
  std::optional<ModelSpec> target;
  // tot-run: temperature overrides for the generator and evaluator pairs;
  // both default to the model specs' own temperature.
  std::optional<double> generator_temperature;
  std::optional<double> evaluator_temperature;

  LosslessnessConfig lossless;

  TreeConfig tree;
  TokenSeq prompt;
  // Virtual cost of one target-model autoregressive token, the speedup
  // baseline for tot-run reports.
  Tick target_ar_ticks = 1;

  SweepGrid grid;
  std::vector<Strategy> strategies;

  std::optional<std::filesystem::path> out_dir;
  ReportFormat format = ReportFormat::kTable;

  // Pushes seed and execution mode into the nested sections.
  void apply_overrides();
};

// `base_dir` resolves relative corpus paths. Throws ConfigError.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace specsched
