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

#include "specsched/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"
#include "specsched/errors.hpp"
#include "specsched/metrics.hpp"
#include "specsched/rng.hpp"
#include "specsched/speculative.hpp"
#include "specsched/tree_builder.hpp"

namespace specsched {

Cell cell(const std::string& text) { return Cell{text, true}; }
Cell cell(const char* text) { return Cell{text, true}; }
Cell cell(std::uint64_t value) { return Cell{std::to_string(value), false}; }
Cell cell(bool value) { return Cell{value ? "true" : "false", false}; }

Cell cell(double value, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << value;
  return Cell{os.str(), false};
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(tokens[i]);
  }
  return out;
}

void write_table(std::ostream& out, const ReportSection& s) {
  std::vector<std::size_t> width(s.columns.size());
  for (std::size_t c = 0; c < s.columns.size(); ++c) width[c] = s.columns[c].size();
  for (const auto& row : s.rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], row[c].text.size());
    }
  }
  out << "== " << s.name << " ==\n";
  auto line = [&](auto&& text_at) {
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string t = text_at(c);
      out << t;
      if (c + 1 < width.size()) out << std::string(width[c] - t.size() + 2, ' ');
    }
    out << '\n';
  };
  line([&](std::size_t c) { return s.columns[c]; });
  for (const auto& row : s.rows) {
    line([&](std::size_t c) { return c < row.size() ? row[c].text : std::string(); });
  }
}

Monitor trace_monitor(const std::string& name, const TraceReport& report) {
  Monitor m{name, report.ok(), ""};
  if (!report.ok()) {
    m.detail = std::to_string(report.violations.size()) + " violation(s), first: " +
               report.violations.front();
  }
  return m;
}

void add_monitor_section(ExperimentResult& result) {
  ReportSection s{"monitors", {"monitor", "passed", "detail"}, {}};
  for (const Monitor& m : result.monitors) {
    s.rows.push_back({cell(m.name), cell(m.passed), cell(m.detail)});
  }
  result.report.sections.push_back(std::move(s));
}

ModelSpec with_temperature(ModelSpec spec, const std::optional<double>& t) {
  if (t) spec.temperature = *t;
  return spec;
}

// Exact per-position marginals of the target's autoregressive distribution.
std::vector<std::vector<double>> exact_marginals(const LanguageModel& target,
                                                 const TokenSeq& prefix, std::size_t length) {
  const std::size_t v = target.vocab_size();
  double states = 1.0;
  for (std::size_t i = 0; i + 1 < length; ++i) states *= static_cast<double>(v);
  if (states > 2e6) throw ConfigError("losslessness: vocab_size^(length-1) too large to enumerate");

  std::vector<std::vector<double>> marginals(length, std::vector<double>(v, 0.0));
  std::map<TokenSeq, double> frontier{{prefix, 1.0}};
  for (std::size_t pos = 0; pos < length; ++pos) {
    std::map<TokenSeq, double> next;
    for (const auto& [ctx, mass] : frontier) {
      const Distribution p = target.next_distribution(ctx);
      for (TokenId t = 0; t < v; ++t) {
        if (p[t] == 0.0) continue;
        marginals[pos][t] += mass * p[t];
        if (pos + 1 < length) {
          TokenSeq longer = ctx;
          longer.push_back(t);
          next[std::move(longer)] += mass * p[t];
        }
      }
    }
    frontier = std::move(next);
  }
  return marginals;
}

double tv_to_counts(const std::vector<double>& exact, const std::vector<std::uint64_t>& counts,
                    std::size_t samples) {
  double tv = 0.0;
  for (std::size_t t = 0; t < exact.size(); ++t) {
    tv += std::abs(exact[t] - static_cast<double>(counts[t]) / static_cast<double>(samples));
  }
  return 0.5 * tv;
}

ExperimentResult run_losslessness(const ExperimentConfig& cfg) {
  const ModelPtr draft = make_model(*cfg.draft);
  const ModelPtr target = make_model(*cfg.target);
  const LosslessnessConfig& l = cfg.lossless;
  const std::size_t v = target->vocab_size();
  const auto exact = exact_marginals(*target, l.prefix, l.length);

  using Counts = std::vector<std::vector<std::uint64_t>>;
  Counts spec_counts(l.length, std::vector<std::uint64_t>(v, 0));
  Counts direct_counts = spec_counts;
  GenerationStats stats;
  const std::uint64_t spec_seed = derive_seed(cfg.seed, 0);
  const std::uint64_t direct_seed = derive_seed(cfg.seed, 1);
  for (std::size_t s = 0; s < l.samples; ++s) {
    GenerationStats one;
    const TokenSeq a =
        speculative_generate(*draft, *target, l.prefix, l.length, l.kconfig, spec_seed, s, &one);
    stats.rounds += one.rounds;
    stats.drafted += one.drafted;
    stats.accepted += one.accepted;
    stats.emitted += one.emitted;
    const TokenSeq b = autoregressive_generate(*target, l.prefix, l.length, direct_seed, s);
    for (std::size_t pos = 0; pos < l.length; ++pos) {
      ++spec_counts[pos][a[pos]];
      ++direct_counts[pos][b[pos]];
    }
  }

  ExperimentResult result;
  ReportSection tv{"losslessness",
                   {"sampler", "position", "samples", "tv", "threshold", "passed"},
                   {}};
  double worst_spec = 0.0, worst_direct = 0.0;
  for (const auto& [name, counts, worst] :
       {std::tuple<const char*, const Counts*, double*>{"speculative", &spec_counts, &worst_spec},
        std::tuple<const char*, const Counts*, double*>{"direct", &direct_counts,
                                                        &worst_direct}}) {
    for (std::size_t pos = 0; pos < l.length; ++pos) {
      const double d = tv_to_counts(exact[pos], (*counts)[pos], l.samples);
      *worst = std::max(*worst, d);
      tv.rows.push_back({cell(name), cell(static_cast<std::uint64_t>(pos)),
                         cell(static_cast<std::uint64_t>(l.samples)), cell(d, 6),
                         cell(l.threshold, 6), cell(d <= l.threshold)});
    }
  }
  result.report.sections.push_back(std::move(tv));

  const Distribution p_t = target->next_distribution(l.prefix);
  const Distribution p_d = draft->next_distribution(l.prefix);
  const Metrics m = make_metrics(stats.emitted, 0.0, stats.accepted, stats.drafted);
  result.report.sections.push_back(
      {"acceptance",
       {"k_config", "rounds", "drafted", "accepted", "alpha", "expected_alpha_first_position"},
       {{cell(l.kconfig.to_string()), cell(static_cast<std::uint64_t>(stats.rounds)),
         cell(m.drafted), cell(m.accepted), cell(m.alpha, 6),
         cell(expected_alpha(p_t, p_d), 6)}}});

  std::ostringstream detail;
  detail << "max tv " << std::setprecision(6) << worst_spec;
  result.monitors.push_back({"speculative-tv", worst_spec <= l.threshold, detail.str()});
  std::ostringstream control;
  control << "max tv " << std::setprecision(6) << worst_direct;
  result.monitors.push_back({"direct-sampling-control", worst_direct <= l.threshold,
                             control.str()});
  return result;
}

std::vector<Cell> metrics_row(const std::string& scope, std::uint64_t calls, const Metrics& m) {
  return {cell(scope),
          cell(calls),
          cell(m.tokens_total),
          cell(m.wall_time, 2),
          cell(round_rate(m.tokens_per_second), 2),
          cell(m.drafted),
          cell(m.accepted),
          cell(m.alpha, 6),
          m.speedup ? cell(round_speedup(*m.speedup), 3) : cell("")};
}

ExperimentResult run_tot(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                         ReportFormat) {
  const ModelSpec gen_draft = with_temperature(*cfg.draft, cfg.generator_temperature);
  const ModelSpec gen_target = with_temperature(*cfg.target, cfg.generator_temperature);
  const ModelSpec eval_draft = with_temperature(*cfg.draft, cfg.evaluator_temperature);
  const ModelSpec eval_target = with_temperature(*cfg.target, cfg.evaluator_temperature);
  const ModelPair generator{make_model(gen_draft), make_model(gen_target)};
  const ModelPair evaluator{make_model(eval_draft), make_model(eval_target)};

  TreeBuilder builder(generator, evaluator, cfg.tree);
  const TreeResult tree = builder.build_tree(cfg.prompt);

  ExperimentResult result;
  result.monitors.push_back(trace_monitor("trace-invariants", validate_trace(tree.trace)));

  ComponentSplit split;
  try {
    split = component_split(tree.trace, tree.calls);
    result.monitors.push_back({"component-split", true, ""});
  } catch (const InputError& e) {
    result.monitors.push_back({"component-split", false, e.what()});
  }

  // Baseline: the target model generating the same number of tokens
  // autoregressively.
  Metrics baseline;
  const std::uint64_t tokens = split.total.tokens_total;
  if (cfg.execution == ExecutionMode::kVirtual) {
    baseline = make_metrics(tokens, static_cast<double>(tokens * cfg.target_ar_ticks), 0, 0);
  } else {
    const auto start = std::chrono::steady_clock::now();
    autoregressive_generate(*generator.target, cfg.prompt, tokens, cfg.seed, 0);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    baseline = make_metrics(tokens, wall.count(), 0, 0);
    // Trace times are microseconds in threaded runs.
    for (Metrics* m : {&split.thought_generator, &split.state_evaluator, &split.total}) {
      *m = make_metrics(m->tokens_total, m->wall_time / 1e6, m->accepted, m->drafted);
    }
  }
  std::map<Component, std::uint64_t> call_count;
  GenerationStats recorded;
  for (const CallRecord& c : tree.calls) {
    ++call_count[c.component];
    recorded.emitted += c.totals.emitted;
    recorded.accepted += c.totals.accepted;
    recorded.drafted += c.totals.drafted;
  }
  for (Metrics* m : {&split.thought_generator, &split.state_evaluator, &split.total}) {
    if (m->tokens_total > 0 && baseline.tokens_per_second > 0.0 && m->wall_time > 0.0) {
      m->speedup = compute_speedup(*m, baseline);
    }
  }

  const Metrics from_records = make_metrics(recorded.emitted, 0.0, recorded.accepted,
                                            recorded.drafted);
  const Metrics from_trace = metrics_from_trace(tree.trace);
  std::ostringstream alpha_detail;
  alpha_detail << std::setprecision(17) << from_records.alpha << " vs " << from_trace.alpha;
  result.monitors.push_back({"alpha-recomputation", from_records.alpha == from_trace.alpha,
                             alpha_detail.str()});

  bool widths_ok = tree.levels.size() == cfg.tree.steps + 1;
  for (std::size_t lv = 1; widths_ok && lv < tree.levels.size(); ++lv) {
    const std::size_t candidates = tree.levels[lv - 1].size() * cfg.tree.thoughts;
    widths_ok = tree.levels[lv].size() == std::min(cfg.tree.breadth, candidates);
  }
  result.monitors.push_back({"level-widths", widths_ok, ""});

  ReportSection metrics{"metrics",
                        {"scope", "calls", "tokens_total", "wall_time", "tokens_per_second",
                         "drafted", "accepted", "alpha", "speedup"},
                        {}};
  metrics.rows.push_back(metrics_row("thought-generator",
                                     call_count[Component::kThoughtGenerator],
                                     split.thought_generator));
  metrics.rows.push_back(metrics_row("state-evaluator", call_count[Component::kStateEvaluator],
                                     split.state_evaluator));
  metrics.rows.push_back(metrics_row("total", tree.calls.size(), split.total));
  metrics.rows.push_back(metrics_row("autoregressive-baseline", 0, baseline));
  result.report.sections.push_back(std::move(metrics));

  const ReasoningNode& best = tree.nodes[tree.best_leaf];
  result.report.sections.push_back(
      {"tree",
       {"nodes", "levels", "best_leaf", "best_score", "best_tokens", "final_generation",
        "warnings"},
       {{cell(static_cast<std::uint64_t>(tree.nodes.size())),
         cell(static_cast<std::uint64_t>(tree.levels.size() - 1)),
         cell(static_cast<std::uint64_t>(tree.best_leaf)),
         best.score ? cell(*best.score, 3) : cell(""), cell(join_tokens(best.tokens)),
         cell(join_tokens(tree.final_generation)),
         cell(static_cast<std::uint64_t>(tree.warnings.size()))}}});

  const auto trace_path = out_dir / "trace.jsonl";
  std::ofstream trace_out(trace_path);
  tree.trace.write_jsonl(trace_out);
  result.files.push_back(trace_path);
  const auto tree_path = out_dir / "tree.csv";
  std::ofstream tree_out(tree_path);
  write_tree_dump(tree_out, tree);
  result.files.push_back(tree_path);
  return result;
}

ExperimentResult run_timing(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  std::vector<Strategy> strategies = cfg.strategies;
  if (strategies.empty()) strategies.assign(std::begin(kAllStrategies), std::end(kAllStrategies));

  std::size_t traces = 0;
  std::size_t bad_traces = 0;
  std::string first_violation;
  const auto observer = [&](const TimingParams&, Strategy s, const ScheduleTrace& trace) {
    if (s != Strategy::kSerialSd && s != Strategy::kScheduledSd) return;
    ++traces;
    const TraceReport r = validate_trace(trace);
    if (!r.ok()) {
      if (bad_traces++ == 0) first_violation = to_string(s) + ": " + r.violations.front();
    }
  };
  const std::vector<TimingParams> grid = cfg.grid.expand();
  const std::vector<SweepRow> rows = sweep(strategies, grid, observer);

  ExperimentResult result;
  result.monitors.push_back(
      {"trace-invariants", bad_traces == 0,
       std::to_string(traces) + " traces checked" +
           (bad_traces ? ", first violation: " + first_violation : std::string())});

  // Scheduled SD never loses to serial SD when there is more than one sequence.
  std::map<std::size_t, std::map<Strategy, Tick>> by_point;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    by_point[i / strategies.size()][rows[i].result.strategy] = rows[i].result.makespan;
  }
  std::size_t checked = 0, violations = 0;
  for (const auto& [point, makespans] : by_point) {
    if (grid[point].n < 2) continue;
    auto serial = makespans.find(Strategy::kSerialSd);
    auto scheduled = makespans.find(Strategy::kScheduledSd);
    if (serial == makespans.end() || scheduled == makespans.end()) continue;
    ++checked;
    if (scheduled->second > serial->second) ++violations;
  }
  result.monitors.push_back({"scheduled-dominates-serial-sd", violations == 0,
                             std::to_string(checked) + " points, " +
                                 std::to_string(violations) + " violations"});

  ReportSection summary{"timing-summary",
                        {"strategy", "points", "mean_makespan", "mean_busy_fraction",
                         "mean_tokens_per_tick", "mean_speedup_vs_serial"},
                        {}};
  for (Strategy s : strategies) {
    double makespan = 0, busy = 0, tpt = 0, speedup = 0;
    std::uint64_t points = 0;
    for (const SweepRow& r : rows) {
      if (r.result.strategy != s) continue;
      ++points;
      makespan += static_cast<double>(r.result.makespan);
      busy += r.result.target_busy_fraction;
      tpt += r.result.tokens_per_tick;
      speedup += r.speedup_vs_serial;
    }
    const double n = points ? static_cast<double>(points) : 1.0;
    summary.rows.push_back({cell(to_string(s)), cell(points), cell(makespan / n, 2),
                            cell(busy / n, 4), cell(tpt / n, 4), cell(speedup / n, 3)});
  }
  result.report.sections.push_back(std::move(summary));

  const auto sweep_path = out_dir / "sweep.csv";
  std::ofstream sweep_out(sweep_path);
  write_sweep_csv(sweep_out, rows);
  result.files.push_back(sweep_path);
  return result;
}

}  // namespace

void Report::write(std::ostream& out, ReportFormat format) const {
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const ReportSection& s = sections[i];
    switch (format) {
      case ReportFormat::kTable:
        if (i) out << '\n';
        write_table(out, s);
        break;
      case ReportFormat::kCsv:
        if (i) out << '\n';
        for (std::size_t c = 0; c < s.columns.size(); ++c) {
          out << (c ? "," : "") << csv_field(s.columns[c]);
        }
        out << '\n';
        for (const auto& row : s.rows) {
          for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << csv_field(row[c].text);
          }
          out << '\n';
        }
        break;
      case ReportFormat::kJsonl:
        for (const auto& row : s.rows) {
          nlohmann::ordered_json j;
          j["section"] = s.name;
          for (std::size_t c = 0; c < row.size() && c < s.columns.size(); ++c) {
            j[s.columns[c]] = row[c].quoted ? nlohmann::ordered_json(row[c].text)
                                            : nlohmann::ordered_json::parse(row[c].text);
          }
          out << j.dump() << '\n';
        }
        break;
    }
  }
}

std::string Report::to_string(ReportFormat format) const {
  std::ostringstream os;
  write(os, format);
  return os.str();
}

bool ExperimentResult::passed() const {
  return std::all_of(monitors.begin(), monitors.end(), [](const Monitor& m) { return m.passed; });
}

std::string report_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::kTable: return "txt";
    case ReportFormat::kCsv: return "csv";
    case ReportFormat::kJsonl: return "jsonl";
  }
  return "txt";
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw InputError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  ExperimentResult result;
  switch (config.mode) {
    case ExperimentMode::kLosslessness: result = run_losslessness(config); break;
    case ExperimentMode::kTotRun: result = run_tot(config, out_dir, config.format); break;
    case ExperimentMode::kTimingSweep: result = run_timing(config, out_dir); break;
  }
  result.report.sections.insert(
      result.report.sections.begin(),
      {"experiment",
       {"mode", "seed", "execution", "schema_version"},
       {{cell(to_string(config.mode)), cell(config.seed), cell(to_string(config.execution)),
         cell(static_cast<std::uint64_t>(config.schema_version))}}});
  add_monitor_section(result);

  const auto report_path = out_dir / ("report." + report_extension(config.format));
  std::ofstream out(report_path);
  if (!out) throw InputError("cannot write " + report_path.string());
  result.report.write(out, config.format);
  result.files.insert(result.files.begin(), report_path);
  return result;
}

ExperimentResult replay_trace(const ScheduleTrace& trace) {
  const TraceReport report = validate_trace(trace);
  const Metrics reduced = metrics_from_trace(trace);
  ExperimentResult result;
  ReportSection calls{"calls",
                      {"call", "sequences", "requests", "verified", "dropped", "drafted",
                       "accepted", "alpha", "tokens", "span", "verifier_busy"},
                      {}};
  for (const auto& [id, c] : report.calls) {
    const double alpha =
        c.drafted ? static_cast<double>(c.accepted) / static_cast<double>(c.drafted) : 0.0;
    calls.rows.push_back({cell(static_cast<std::uint64_t>(id)),
                          cell(static_cast<std::uint64_t>(c.sequences)), cell(c.requests),
                          cell(c.verified), cell(c.dropped), cell(c.drafted), cell(c.accepted),
                          cell(alpha, 6), cell(c.tokens), cell(c.end - c.start),
                          cell(c.verifier_busy)});
  }
  result.report.sections.push_back(std::move(calls));
  result.report.sections.push_back(
      {"totals",
       {"events", "tokens", "drafted", "accepted", "alpha", "span", "verifier_busy",
        "verifier_idle"},
       {{cell(static_cast<std::uint64_t>(trace.size())), cell(reduced.tokens_total),
         cell(reduced.drafted), cell(reduced.accepted), cell(reduced.alpha, 6),
         cell(report.span()), cell(report.verifier_busy), cell(report.verifier_idle)}}});
  result.monitors.push_back(trace_monitor("trace-invariants", report));
  result.monitors.push_back({"alpha-recomputation", reduced.alpha == report.alpha(), ""});
  for (std::size_t i = 1; i < report.violations.size() && i < 20; ++i) {
    result.monitors.push_back({"violation", false, report.violations[i]});
  }
  add_monitor_section(result);
  return result;
}

}  // namespace specsched
