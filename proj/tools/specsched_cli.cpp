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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "specsched/config.hpp"
#include "specsched/errors.hpp"
#include "specsched/experiment.hpp"
#include "specsched/scheduler.hpp"
#include "specsched/trace.hpp"

namespace {

using namespace specsched;

constexpr int kExitMonitorFailed = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitInternal = 3;

int report_error(const std::string& kind, const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  std::cerr << j.dump() << std::endl;
  return code;
}

struct Flags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

std::filesystem::path resolve_out_dir(const Flags& flags, const ExperimentConfig& cfg) {
  if (flags.out) return *flags.out;
  if (cfg.out_dir) return *cfg.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return kDefaultOutDir;
}

int finish(const ExperimentResult& result, ReportFormat format) {
  result.report.write(std::cout, format);
  for (const auto& f : result.files) std::cerr << "wrote " << f.string() << '\n';
  return result.passed() ? 0 : kExitMonitorFailed;
}

int run_config(const std::string& path, const Flags& flags,
               std::optional<ExperimentMode> required) {
  ExperimentConfig cfg = load_experiment_config(path);
  if (required && cfg.mode != *required) {
    throw ConfigError("config mode is '" + to_string(cfg.mode) + "', expected '" +
                      to_string(*required) + "'");
  }
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.mode) cfg.execution = execution_mode_from_string(*flags.mode);
  if (flags.format) cfg.format = report_format_from_string(*flags.format);
  cfg.apply_overrides();
  const ExperimentResult result = run_experiment(cfg, resolve_out_dir(flags, cfg));
  return finish(result, cfg.format);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scheduled speculative decoding experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  app.add_option("--seed", flags.seed, "Override the config seed");
  app.add_option("--mode", flags.mode, "Execution mode")
      ->check(CLI::IsMember({"virtual", "threaded"}));
  app.add_option("--out", flags.out, "Output directory (default $SPECSCHED_OUT_DIR)");
  app.add_option("--format", flags.format, "Report format")
      ->check(CLI::IsMember({"table", "csv", "jsonl"}));

  std::string path;
  auto* run = app.add_subcommand("run", "Run the experiment a config describes");
  run->add_option("config", path, "Config file")->required();
  auto* sweep = app.add_subcommand("sweep", "Run a timing-sweep config");
  sweep->add_option("config", path, "Config file")->required();
  auto* lossless = app.add_subcommand("verify-lossless", "Run a losslessness config");
  lossless->add_option("config", path, "Config file")->required();
  auto* replay = app.add_subcommand("replay-trace", "Validate a recorded trace");
  replay->add_option("trace", path, "Trace file (line-delimited records)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage_error", e.what(), kExitBadInput);
  }

  try {
    if (*run) return run_config(path, flags, std::nullopt);
    if (*sweep) return run_config(path, flags, ExperimentMode::kTimingSweep);
    if (*lossless) return run_config(path, flags, ExperimentMode::kLosslessness);
    const ExperimentResult result = replay_trace(ScheduleTrace::read_file(path));
    return finish(result, flags.format ? report_format_from_string(*flags.format)
                                       : ReportFormat::kTable);
  } catch (const ConfigError& e) {
    return report_error("config_error", e.what(), kExitBadInput);
  } catch (const InputError& e) {
    return report_error("input_error", e.what(), kExitBadInput);
  } catch (const InvariantViolation& e) {
    return report_error("invariant_violation", e.what(), kExitInternal);
  } catch (const ContractViolation& e) {
    return report_error("contract_violation", e.what(), kExitInternal);
  } catch (const std::exception& e) {
    return report_error("internal_error", e.what(), kExitInternal);
  }
}
