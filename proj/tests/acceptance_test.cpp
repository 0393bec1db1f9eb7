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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails or exceeds its time budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "specsched/metrics.hpp"
#include "specsched/scheduler.hpp"
#include "specsched/speculative.hpp"
#include "specsched/timing_sim.hpp"
#include "specsched/trace_check.hpp"
#include "specsched/tree_builder.hpp"
#include "support.hpp"

using namespace specsched;
using testing::HashModel;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed, {0, Phase::kMonteCarlo}) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_.next_u64() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  double unit() { return rng_.next_unit(); }
  std::uint64_t u64() { return rng_.next_u64(); }

 private:
  RngStream rng_;
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double tv(const std::map<TokenSeq, double>& a, const std::map<TokenSeq, double>& b) {
  double s = 0.0;
  for (const auto& [k, v] : a) s += std::abs(v - (b.contains(k) ? b.at(k) : 0.0));
  for (const auto& [k, v] : b) {
    if (!a.contains(k)) s += v;
  }
  return 0.5 * s;
}

// 1. Chain losslessness.
Outcome chain_losslessness() {
  struct Case {
    std::size_t vocab, k, length;
    double zeros;
  };
  double worst = 0.0;
  for (const Case c : {Case{8, 4, 4, 0.0}, Case{8, 3, 4, 0.3}, Case{8, 2, 5, 0.25},
                       Case{4, 4, 7, 0.3}, Case{3, 3, 6, 0.0}, Case{2, 4, 8, 0.0}}) {
    HashModel t(c.vocab, 1000 + c.vocab + c.k, c.zeros);
    HashModel d(c.vocab, 2000 + c.vocab + c.k, c.zeros, 1.4);
    const auto spec = testing::speculative_sequence_distribution(d, t, KConfig::chain(c.k),
                                                                 TokenSeq{0}, c.length);
    const auto ar = testing::target_sequence_distribution(t, TokenSeq{0}, c.length);
    worst = std::max(worst, testing::max_abs_difference(spec, ar));
  }

  const std::size_t n = 100000;
  // Joint law of two tokens on V=3, and the first-token marginal on V=8.
  HashModel t3(3, 31, 0.1), d3(3, 32, 0.0, 1.5);
  const auto exact3 = testing::target_sequence_distribution(t3, TokenSeq{1}, 2);
  std::map<TokenSeq, double> emp3;
  for (std::size_t i = 0; i < n; ++i) {
    emp3[speculative_generate(d3, t3, TokenSeq{1}, 2, KConfig::chain(3), 5, i)] += 1.0 / n;
  }
  HashModel t8(8, 81), d8(8, 82, 0.2);
  const auto exact8 = testing::target_sequence_distribution(t8, TokenSeq{1}, 1);
  std::map<TokenSeq, double> emp8;
  for (std::size_t i = 0; i < n; ++i) {
    emp8[speculative_generate(d8, t8, TokenSeq{1}, 1, KConfig::chain(4), 6, i)] += 1.0 / n;
  }
  const double mc = std::max(tv(emp3, exact3), tv(emp8, exact8));
  return {worst <= 1e-10 && mc <= 0.01,
          fmt("enumeration max |err| %.3g, Monte-Carlo TV %.4f (N=1e5)", worst, mc)};
}

// 2. Tree verification losslessness and degeneration.
Outcome tree_losslessness() {
  const std::vector<std::vector<std::uint32_t>> shapes{{1}, {2}, {1, 1}, {1, 2}, {2, 1}, {2, 2}};
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t vocab = 2; vocab <= 5; ++vocab) {
    for (const auto& counts : shapes) {
      HashModel t(vocab, 3000 + vocab * 7 + counts.size(), 0.2);
      HashModel d(vocab, 4000 + vocab * 7 + counts.size(), 0.2, 1.3);
      const std::size_t length = vocab <= 4 ? 4 : 3;
      const auto spec = testing::speculative_sequence_distribution(d, t, KConfig(counts),
                                                                   TokenSeq{1}, length);
      const auto ar = testing::target_sequence_distribution(t, TokenSeq{1}, length);
      worst = std::max(worst, testing::max_abs_difference(spec, ar));
      ++cases;
    }
  }
  std::size_t mismatches = 0;
  HashModel t(7, 51, 0.3), d(7, 52, 0.2);
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const TokenSeq prefix{static_cast<TokenId>(s % 7)};
    RngStream dr(s, {0, Phase::kDraft});
    const DraftResult dd = draft(d, prefix, KConfig::chain(1 + s % 5), dr);
    RngStream a(s, {0, Phase::kVerify}), b(s, {0, Phase::kVerify});
    const VerifyOutcome x = verify_chain(t, prefix, dd, a);
    const VerifyOutcome y = verify_tree(t, prefix, dd, b);
    mismatches += x.accepted != y.accepted || x.correction != y.correction || a.draws() != b.draws();
  }
  return {worst <= 1e-10 && mismatches == 0,
          fmt("%g shapes, max |err| %.3g", static_cast<double>(cases), worst) +
              ", chain/tree mismatches " + std::to_string(mismatches) + "/2000"};
}

// 3. Empirical acceptance against sum min(p_t, p_d).
Outcome expected_acceptance() {
  Uniform u(77);
  double worst = 0.0;
  for (std::uint64_t pair = 0; pair < 20; ++pair) {
    const std::size_t vocab = u.between(2, 12);
    HashModel t(vocab, u.u64(), 0.3 * u.unit(), 0.5 + u.unit());
    HashModel d(vocab, u.u64(), 0.3 * u.unit(), 0.5 + u.unit());
    const TokenSeq prefix{static_cast<TokenId>(u.below(vocab))};
    const double want = expected_alpha(t.next_distribution(prefix), d.next_distribution(prefix));
    const std::size_t rounds = 100000;
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < rounds; ++i) {
      RngStream dr(pair, {i, Phase::kDraft}), vr(pair, {i, Phase::kVerify});
      const DraftResult dd = draft(d, prefix, KConfig::chain(1), dr);
      accepted += verify_chain(t, prefix, dd, vr).accepted_count();
    }
    worst = std::max(worst, std::abs(static_cast<double>(accepted) / rounds - want));
  }
  return {worst <= 0.01, fmt("20 pairs x 1e5 rounds, max |alpha - expected| %.4f", worst)};
}

// 4 and 5. Scheduler transparency and trace invariants.
struct TransparencyResult {
  Outcome transparency;
  Outcome traces;
};

TransparencyResult transparency() {
  Uniform u(4242);
  std::size_t mismatches = 0, traces = 0, bad = 0;
  std::string first_violation;
  for (std::size_t c = 0; c < 100; ++c) {
    const std::size_t vocab = u.between(2, 10);
    RunConfig cfg;
    cfg.n = u.between(1, 6);
    cfg.max_new = u.between(1, 16);
    if (u.below(3) == 0) {
      std::vector<std::uint32_t> counts(u.between(1, 3));
      for (auto& x : counts) x = static_cast<std::uint32_t>(u.between(1, 2));
      cfg.kconfig = KConfig(counts);
    } else {
      cfg.kconfig = KConfig::chain(u.between(1, 5));
    }
    cfg.draft_model = std::make_shared<HashModel>(vocab, u.u64(), 0.3 * u.unit(), 0.7 + u.unit());
    cfg.target_model = std::make_shared<HashModel>(vocab, u.u64(), 0.3 * u.unit());
    const std::size_t prefixes = u.below(2) == 0 ? 1 : cfg.n;
    for (std::size_t i = 0; i < prefixes; ++i) {
      TokenSeq p(u.between(0, 4));
      for (auto& x : p) x = static_cast<TokenId>(u.below(vocab));
      cfg.prefixes.push_back(p);
    }
    cfg.seed = u.u64();
    for (std::size_t i = 0; i < cfg.n; ++i) cfg.draft_ticks_per_token.push_back(u.between(1, 4));
    cfg.service.verify = u.between(1, 5);
    cfg.service.resample = u.between(1, 2);

    const RunResult virt = run(cfg);
    cfg.mode = ExecutionMode::kThreaded;
    const RunResult thr = run(cfg);
    for (std::size_t i = 0; i < cfg.n; ++i) {
      const TokenSeq& prefix = cfg.prefixes[prefixes == 1 ? 0 : i];
      const TokenSeq serial = speculative_generate(*cfg.draft_model, *cfg.target_model, prefix,
                                                   cfg.max_new, cfg.kconfig, cfg.seed, i);
      mismatches += virt.responses[i] != serial || thr.responses[i] != serial;
    }
    for (const RunResult* r : {&virt, &thr}) {
      ++traces;
      const TraceReport rep = validate_trace(r->trace);
      if (!rep.ok()) {
        if (bad++ == 0) first_violation = rep.violations.front();
      }
    }
  }
  TransparencyResult out;
  out.transparency = {mismatches == 0, "100 configs, sequences differing across "
                                       "virtual/threaded/serial: " +
                                           std::to_string(mismatches)};
  out.traces = {bad == 0, std::to_string(traces) + " traces, " + std::to_string(bad) +
                              " with violations" +
                              (bad ? " (first: " + first_violation + ")" : std::string())};
  return out;
}

// 6. Timing trends.
Outcome timing_trends() {
  Uniform u(606);
  std::size_t checked = 0, violations = 0;
  for (std::size_t point = 0; point < 200; ++point) {
    TimingParams p;
    p.n = u.between(1, 8);
    p.k = u.between(1, 6);
    p.l = u.between(8, 64);
    p.alpha = u.unit();
    p.t_draft_per_token = u.between(1, 3);
    p.t_verify = u.between(1, 8);
    p.t_resample = u.between(1, 2);
    p.t_target_ar = p.t_verify;
    p.seed = u.u64();
    if (p.n < 2) continue;
    ++checked;
    violations += simulate(Strategy::kScheduledSd, p).result.makespan >
                  simulate(Strategy::kSerialSd, p).result.makespan;
  }

  // Speedup of scheduled-sd over serial AR against alpha, averaged over
  // 40 common seeds.
  const std::size_t seeds = 40;
  std::vector<double> speedup;
  for (int a = 1; a <= 9; ++a) {
    double sum = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) {
      TimingParams p;
      p.n = 4;
      p.k = 4;
      p.l = 64;
      p.alpha = a / 10.0;
      p.t_verify = 4;
      p.t_target_ar = 4;
      p.seed = s;
      sum += static_cast<double>(simulate(Strategy::kSerial, p).result.makespan) /
             static_cast<double>(simulate(Strategy::kScheduledSd, p).result.makespan);
    }
    speedup.push_back(sum / seeds);
  }
  bool alpha_monotone = true;
  for (std::size_t i = 1; i < speedup.size(); ++i) alpha_monotone &= speedup[i] >= speedup[i - 1];

  // Busy fraction against n with t_verify well below k * t_draft.
  std::vector<double> busy;
  for (std::size_t n = 1; n <= 8; ++n) {
    double sum = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) {
      TimingParams p;
      p.n = n;
      p.k = 4;
      p.l = 64;
      p.alpha = 0.7;
      p.t_draft_per_token = 2;
      p.t_verify = 1;
      p.seed = s;
      sum += simulate(Strategy::kScheduledSd, p).result.target_busy_fraction;
    }
    busy.push_back(sum / seeds);
  }
  bool busy_monotone = true;
  for (std::size_t i = 1; i < busy.size(); ++i) busy_monotone &= busy[i] >= busy[i - 1];
  const bool saturating = busy.back() >= 0.85 && (busy[7] - busy[6]) <= 0.25 * (busy[1] - busy[0]);

  std::string detail = std::to_string(checked) + " points with n>=2, " +
                       std::to_string(violations) + " dominance violations; speedup " +
                       fmt("%.3f -> %.3f", speedup.front(), speedup.back()) +
                       (alpha_monotone ? " monotone" : " NOT monotone") + "; busy " +
                       fmt("%.3f -> %.3f", busy.front(), busy.back()) +
                       (busy_monotone ? " monotone" : " NOT monotone") +
                       (saturating ? ", saturating" : ", not saturating");
  return {violations == 0 && alpha_monotone && busy_monotone && saturating, detail};
}

// 7. ToT-BFS selection against brute force.
Outcome tot_bfs() {
  std::size_t runs = 0, wrong_path = 0, wrong_width = 0;
  const auto heuristic = [](const TokenSeq& t) {
    double s = 0;
    for (std::size_t i = 2; i < t.size(); ++i) s += t[i] == 0 ? 1.0 : (t[i] == 1 ? 0.5 : 0.0);
    return s;
  };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ModelPair g{std::make_shared<HashModel>(5, 900 + seed, 0.1, 1.2),
                      std::make_shared<HashModel>(5, 950 + seed, 0.1)};
    for (std::size_t b : {1u, 2u}) {
      TreeConfig cfg;
      cfg.steps = 2;
      cfg.thoughts = 3;
      cfg.breadth = b;
      cfg.thought_len = 4;
      cfg.kconfig = seed % 2 ? KConfig::chain(2) : KConfig({2, 1});
      cfg.seed = seed;
      TreeBuilder builder(g, g, cfg);
      builder.set_state_scorer([&](const ReasoningNode& n) { return heuristic(n.tokens); });
      const TokenSeq prompt{3, 4};
      const TreeResult r = builder.build_tree(prompt);
      const auto want = testing::brute_force_bfs(g, cfg, prompt, heuristic);
      ++runs;
      wrong_path += r.nodes[r.best_leaf].tokens != want.best_leaf;
      const std::size_t w1 = std::min<std::size_t>(b, 3);
      const std::size_t w2 = std::min<std::size_t>(b, 3 * w1);
      wrong_width += r.levels.size() != 3 || r.levels[1].size() != w1 ||
                     r.levels[2].size() != w2 || want.widths != std::vector<std::size_t>{w1, w2};
    }
  }
  return {wrong_path == 0 && wrong_width == 0,
          std::to_string(runs) + " trees (T=2, n=3, b in {1,2}), path mismatches " +
              std::to_string(wrong_path) + ", width mismatches " + std::to_string(wrong_width)};
}

// 8. Tree-attention mask.
Outcome attention_mask() {
  const std::vector<std::uint32_t> counts{2, 2, 1};
  LookupTableModel m(std::vector<double>(8, 0.125));
  RngStream rng(8, {0, Phase::kDraft});
  const DraftResult d = draft(m, TokenSeq{}, KConfig(counts), rng);
  const auto oracle = testing::ancestor_mask(counts);
  bool ok = d.tree.size() == 10 && oracle.size() == 10;
  std::size_t differing = 0;
  for (std::size_t r = 0; ok && r < 10; ++r) {
    for (std::size_t c = 0; c < 10; ++c) differing += d.tree.mask(r, c) != oracle[r][c];
  }
  ok = ok && differing == 0;
  return {ok, std::to_string(d.tree.size()) + " nodes, " + std::to_string(differing) +
                  " differing mask cells"};
}

// 9. Metrics integrity.
Outcome metrics_integrity() {
  auto rate = [](double tps) { return make_metrics(static_cast<std::uint64_t>(tps * 100 + 0.5), 100.0, 0, 0); };
  const double a = round_speedup(compute_speedup(rate(74.44), rate(47.81)));
  const double b = round_speedup(compute_speedup(rate(41.53), rate(38.42)));
  const bool table = std::abs(a - 1.557) < 1e-12 && std::abs(b - 1.081) < 1e-12;

  std::size_t alpha_mismatch = 0, checked = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const ModelPair g{std::make_shared<HashModel>(8, 70 + s, 0.1, 1.3),
                      std::make_shared<HashModel>(8, 80 + s)};
    TreeConfig cfg;
    cfg.steps = 2;
    cfg.thoughts = 3;
    cfg.breadth = 2;
    cfg.thought_len = 5;
    cfg.eval_len = 2;
    cfg.kconfig = KConfig::chain(3);
    cfg.seed = s;
    cfg.eval_template.instruction = {7};
    TreeBuilder builder(g, g, cfg);
    const TreeResult r = builder.build_tree({1, 2});
    GenerationStats recorded;
    for (const CallRecord& c : r.calls) {
      recorded.accepted += c.totals.accepted;
      recorded.drafted += c.totals.drafted;
    }
    const double reported = make_metrics(0, 1.0, recorded.accepted, recorded.drafted).alpha;
    const ComponentSplit split = component_split(r.trace, r.calls);
    const double independent = validate_trace(r.trace).alpha();
    ++checked;
    alpha_mismatch += reported != independent || split.total.alpha != independent;
  }
  return {table && alpha_mismatch == 0,
          fmt("74.44/47.81 -> %.3f, 41.53/38.42 -> %.3f; ", a, b) + "alpha mismatches " +
              std::to_string(alpha_mismatch) + "/" + std::to_string(checked)};
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  bool all = true;
  auto report = [&](int id, const char* name, double budget, const std::function<Outcome()>& f) {
    const auto start = Clock::now();
    Outcome o = f();
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = secs <= budget;
    const bool pass = o.pass && in_time;
    all = all && pass;
    std::printf("%s criterion %d (%s): %s [%.2fs of %.0fs]%s\n", pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str(), secs, budget, in_time ? "" : " over time budget");
    std::fflush(stdout);
  };

  report(1, "chain losslessness", 30, chain_losslessness);
  report(2, "tree verification losslessness", 60, tree_losslessness);
  report(3, "expected acceptance", 60, expected_acceptance);

  TransparencyResult tr;
  report(4, "scheduler transparency", 120, [&] {
    tr = transparency();
    return tr.transparency;
  });
  report(5, "trace invariants", 120, [&] { return tr.traces; });

  report(6, "timing trends", 120, timing_trends);
  report(7, "ToT-BFS correctness", 30, tot_bfs);
  report(8, "tree-attention mask", 1, attention_mask);
  report(9, "metrics integrity", 60, metrics_integrity);
  return all ? 0 : 1;
}
