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

#include "specsched/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "specsched/errors.hpp"

namespace specsched {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->template get<T>();
}

template <typename T>
void read_opt(const json& obj, const char* key, std::optional<T>& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->template get<T>();
}

// A bare integer k means the chain (1, ..., 1) of depth k.
KConfig read_kconfig(const json& v) {
  if (v.is_number_integer()) return KConfig::chain(v.get<std::size_t>());
  return KConfig(v.get<std::vector<std::uint32_t>>());
}

ModelSpec parse_model(const json& j, const std::string& where,
                      const std::filesystem::path& base_dir) {
  check_keys(j,
             {"kind", "vocab_size", "seed", "temperature", "max_context", "row", "order",
              "corpus", "corpus_path", "mix", "base"},
             where);
  ModelSpec spec;
  if (auto it = j.find("kind"); it != j.end()) {
    spec.kind = model_kind_from_string(it->get<std::string>());
  }
  read(j, "seed", spec.seed);
  read(j, "temperature", spec.temperature);
  read(j, "max_context", spec.max_context);
  read_opt(j, "row", spec.row);
  read(j, "order", spec.order);
  read_opt(j, "corpus", spec.corpus);
  if (auto it = j.find("corpus_path"); it != j.end()) {
    std::filesystem::path p = it->get<std::string>();
    spec.corpus_path = p.is_relative() ? base_dir / p : p;
  }
  read(j, "mix", spec.mix);
  if (auto it = j.find("base"); it != j.end()) {
    spec.base = std::make_shared<ModelSpec>(parse_model(*it, where + ".base", base_dir));
  }
  if (auto it = j.find("vocab_size"); it != j.end()) {
    spec.vocab_size = it->get<std::size_t>();
  } else if (spec.row) {
    spec.vocab_size = spec.row->size();
  } else if (spec.base) {
    spec.vocab_size = spec.base->vocab_size;
  } else {
    throw ConfigError(where + ": vocab_size is required");
  }
  if (spec.vocab_size == 0) throw ConfigError(where + ": vocab_size must be positive");
  return spec;
}

ServiceTimes parse_service(const json& j) {
  check_keys(j, {"draft_per_token", "verify", "resample"}, "tree.service");
  ServiceTimes s;
  read(j, "draft_per_token", s.draft_per_token);
  read(j, "verify", s.verify);
  read(j, "resample", s.resample);
  return s;
}

ValueParser parse_value_parser(const json& j) {
  check_keys(j, {"mode", "digit_base", "classes", "default"}, "tree.value_parser");
  ValueParser p;
  if (auto it = j.find("mode"); it != j.end()) {
    const auto m = it->get<std::string>();
    if (m == "scalar-token") {
      p.mode = ValueMode::kScalarToken;
    } else if (m == "classifier-map") {
      p.mode = ValueMode::kClassifierMap;
    } else {
      throw ConfigError("tree.value_parser: unknown mode '" + m + "'");
    }
  }
  read(j, "digit_base", p.digit_base);
  read(j, "default", p.default_value);
  if (auto it = j.find("classes"); it != j.end()) {
    for (const auto& [tok, value] : it->items()) {
      p.classes[static_cast<TokenId>(std::stoul(tok))] = value.get<double>();
    }
  }
  if (p.mode == ValueMode::kClassifierMap && p.classes.empty()) {
    throw ConfigError("tree.value_parser: classifier-map needs classes");
  }
  return p;
}

void parse_tree(const json& j, ExperimentConfig& cfg) {
  check_keys(j,
             {"steps", "thoughts", "breadth", "thought_len", "eval_len", "final_length",
              "k_config", "prompt", "eval_template", "value_parser", "service",
              "generator_temperature", "evaluator_temperature", "target_ar_ticks"},
             "tree");
  TreeConfig& t = cfg.tree;
  read(j, "steps", t.steps);
  read(j, "thoughts", t.thoughts);
  read(j, "breadth", t.breadth);
  read(j, "thought_len", t.thought_len);
  read(j, "eval_len", t.eval_len);
  read_opt(j, "final_length", t.final_length);
  if (auto it = j.find("k_config"); it != j.end()) t.kconfig = read_kconfig(*it);
  read(j, "prompt", cfg.prompt);
  if (auto it = j.find("eval_template"); it != j.end()) {
    check_keys(*it, {"instruction", "value_slot"}, "tree.eval_template");
    read(*it, "instruction", t.eval_template.instruction);
    read(*it, "value_slot", t.eval_template.value_slot);
  }
  if (auto it = j.find("value_parser"); it != j.end()) t.parser = parse_value_parser(*it);
  if (auto it = j.find("service"); it != j.end()) t.service = parse_service(*it);
  read_opt(j, "generator_temperature", cfg.generator_temperature);
  read_opt(j, "evaluator_temperature", cfg.evaluator_temperature);
  read(j, "target_ar_ticks", cfg.target_ar_ticks);
  if (cfg.target_ar_ticks == 0) throw ConfigError("tree.target_ar_ticks must be positive");
}

void parse_timing_params(const json& j, TimingParams& p, const std::string& where) {
  check_keys(j,
             {"t_draft_per_token", "t_verify", "t_resample", "t_target_ar", "n", "k", "l",
              "alpha"},
             where);
  read(j, "t_draft_per_token", p.t_draft_per_token);
  read(j, "t_verify", p.t_verify);
  read(j, "t_resample", p.t_resample);
  read(j, "t_target_ar", p.t_target_ar);
  read(j, "n", p.n);
  read(j, "k", p.k);
  read(j, "l", p.l);
  read(j, "alpha", p.alpha);
}

void parse_timing(const json& j, ExperimentConfig& cfg) {
  check_keys(j, {"base", "grid", "strategies"}, "timing");
  if (auto it = j.find("base"); it != j.end()) parse_timing_params(*it, cfg.grid.base, "timing.base");
  if (auto it = j.find("grid"); it != j.end()) {
    check_keys(*it, {"n", "k", "l", "alpha", "seeds"}, "timing.grid");
    read(*it, "n", cfg.grid.n);
    read(*it, "k", cfg.grid.k);
    read(*it, "l", cfg.grid.l);
    read(*it, "alpha", cfg.grid.alpha);
    read(*it, "seeds", cfg.grid.seeds);
  }
  if (auto it = j.find("strategies"); it != j.end()) {
    for (const auto& s : *it) cfg.strategies.push_back(strategy_from_string(s.get<std::string>()));
  }
}

void parse_lossless(const json& j, LosslessnessConfig& l) {
  check_keys(j, {"samples", "length", "threshold", "prefix", "k_config"}, "losslessness");
  read(j, "samples", l.samples);
  read(j, "length", l.length);
  read(j, "threshold", l.threshold);
  read(j, "prefix", l.prefix);
  if (auto it = j.find("k_config"); it != j.end()) l.kconfig = read_kconfig(*it);
  if (l.samples == 0 || l.length == 0) {
    throw ConfigError("losslessness: samples and length must be positive");
  }
  if (!(l.threshold > 0.0)) throw ConfigError("losslessness: threshold must be positive");
}

ExperimentConfig parse_root(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j,
             {"schema_version", "mode", "seed", "execution", "models", "losslessness", "tree",
              "timing", "output"},
             "config");
  ExperimentConfig cfg;
  auto version = j.find("schema_version");
  if (version == j.end()) throw ConfigError("config: schema_version is required");
  cfg.schema_version = version->get<int>();
  if (cfg.schema_version != kSchemaVersion) {
    throw ConfigError("config: unsupported schema_version " + std::to_string(cfg.schema_version));
  }
  auto mode = j.find("mode");
  if (mode == j.end()) throw ConfigError("config: mode is required");
  cfg.mode = experiment_mode_from_string(mode->get<std::string>());
  read(j, "seed", cfg.seed);
  if (auto it = j.find("execution"); it != j.end()) {
    cfg.execution = execution_mode_from_string(it->get<std::string>());
  }
  if (auto it = j.find("models"); it != j.end()) {
    check_keys(*it, {"draft", "target"}, "models");
    if (!it->contains("draft") || !it->contains("target")) {
      throw ConfigError("models: both draft and target are required");
    }
    cfg.draft = parse_model(it->at("draft"), "models.draft", base_dir);
    cfg.target = parse_model(it->at("target"), "models.target", base_dir);
    if (cfg.draft->vocab_size != cfg.target->vocab_size) {
      throw ConfigError("models: draft and target vocabulary sizes differ");
    }
  }
  if (auto it = j.find("losslessness"); it != j.end()) parse_lossless(*it, cfg.lossless);
  if (auto it = j.find("tree"); it != j.end()) parse_tree(*it, cfg);
  if (auto it = j.find("timing"); it != j.end()) parse_timing(*it, cfg);
  if (auto it = j.find("output"); it != j.end()) {
    check_keys(*it, {"dir", "format"}, "output");
    if (auto d = it->find("dir"); d != it->end()) {
      cfg.out_dir = std::filesystem::path(d->get<std::string>());
    }
    if (auto f = it->find("format"); f != it->end()) {
      cfg.format = report_format_from_string(f->get<std::string>());
    }
  }

  switch (cfg.mode) {
    case ExperimentMode::kLosslessness:
    case ExperimentMode::kTotRun:
      if (!cfg.draft) throw ConfigError("mode " + to_string(cfg.mode) + " needs a models section");
      break;
    case ExperimentMode::kTimingSweep:
      if (!j.contains("timing")) throw ConfigError("mode timing-sweep needs a timing section");
      break;
  }
  cfg.apply_overrides();
  if (cfg.mode == ExperimentMode::kTotRun) cfg.tree.validate();
  if (cfg.mode == ExperimentMode::kTimingSweep) {
    for (const TimingParams& p : cfg.grid.expand()) p.validate();
  }
  return cfg;
}

}  // namespace

std::string to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::kLosslessness: return "losslessness";
    case ExperimentMode::kTotRun: return "tot-run";
    case ExperimentMode::kTimingSweep: return "timing-sweep";
  }
  return "?";
}

ExperimentMode experiment_mode_from_string(const std::string& name) {
  if (name == "losslessness") return ExperimentMode::kLosslessness;
  if (name == "tot-run") return ExperimentMode::kTotRun;
  if (name == "timing-sweep") return ExperimentMode::kTimingSweep;
  throw ConfigError("unknown experiment mode '" + name + "'");
}

std::string to_string(ReportFormat format) {
  switch (format) {
    case ReportFormat::kTable: return "table";
    case ReportFormat::kCsv: return "csv";
    case ReportFormat::kJsonl: return "jsonl";
  }
  return "?";
}

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "table") return ReportFormat::kTable;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "jsonl" || name == "json-lines") return ReportFormat::kJsonl;
  throw ConfigError("unknown report format '" + name + "'");
}

void ExperimentConfig::apply_overrides() {
  tree.seed = seed;
  tree.mode = execution;
  grid.base.seed = seed;
}

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir) {
  try {
    return parse_root(json::parse(text), base_dir);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.parent_path());
}

}  // namespace specsched
