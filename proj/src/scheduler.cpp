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

#include "specsched/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "specsched/errors.hpp"

namespace specsched {
namespace {

[[noreturn]] void rethrow_with_sequence(std::size_t i) {
  const std::string where = "sequence " + std::to_string(i) + ": ";
  try {
    throw;
  } catch (const ContractViolation& e) {
    throw ContractViolation(where + e.what());
  } catch (const InputError& e) {
    throw InputError(where + e.what());
  }
}

// Token-level content for the rounds: owns each sequence's prefix, validated
// tokens and random streams. Sequence i's state is touched by its drafter
// while gamma_i = 1 and by the verifier while gamma_i = 0, never both.
class TokenExecutor {
 public:
  using Payload = DraftResult;

  explicit TokenExecutor(const RunConfig& cfg) : cfg_(cfg) {
    const std::size_t n = cfg.n;
    contexts_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      contexts_.push_back(cfg.prefixes.size() == 1 ? cfg.prefixes[0] : cfg.prefixes[i]);
      prefix_len_.push_back(contexts_.back().size());
      draft_rngs_.emplace_back(cfg.seed, StreamId{i, Phase::kDraft});
      verify_rngs_.emplace_back(cfg.seed, StreamId{i, Phase::kVerify});
    }
    pending_.resize(n);
    stats_.resize(n);
    warnings_.resize(n);
  }

  std::pair<DraftResult, Tick> draft(std::size_t i) {
    try {
      DraftResult d = specsched::draft(*cfg_.draft_model, contexts_[i], cfg_.kconfig,
                                       draft_rngs_[i]);
      for (auto& w : d.warnings) warnings_[i].push_back(std::move(w));
      d.warnings.clear();
      const Tick per_token = cfg_.draft_ticks_per_token.empty() ? cfg_.service.draft_per_token
                                                                : cfg_.draft_ticks_per_token[i];
      return {std::move(d), per_token * cfg_.kconfig.depth()};
    } catch (...) {
      rethrow_with_sequence(i);
    }
  }

  std::pair<RoundTally, Tick> verify(const VerifyRequest<DraftResult>& req) {
    const std::size_t i = req.sequence;
    try {
      const VerifyOutcome o =
          specsched::verify(*cfg_.target_model, contexts_[i], req.draft, verify_rngs_[i]);
      pending_[i] = o.emitted();
      GenerationStats& s = stats_[i];
      ++s.rounds;
      s.drafted += o.drafted;
      s.accepted += o.accepted_count();
      s.corrections += o.correction ? 1 : 0;
      RoundTally tally{o.total_emitted(), o.accepted_count(), o.drafted, o.correction.has_value()};
      return {tally, cfg_.service.verify + (tally.corrected ? cfg_.service.resample : 0)};
    } catch (...) {
      rethrow_with_sequence(i);
    }
  }

  void commit(std::size_t i, std::size_t kept) {
    const TokenSeq& emitted = pending_[i];
    contexts_[i].insert(contexts_[i].end(), emitted.begin(),
                        emitted.begin() + static_cast<std::ptrdiff_t>(kept));
    stats_[i].emitted += kept;
    pending_[i].clear();
  }

  std::vector<TokenSeq> responses() const {
    std::vector<TokenSeq> out;
    for (std::size_t i = 0; i < contexts_.size(); ++i) {
      out.emplace_back(contexts_[i].begin() + static_cast<std::ptrdiff_t>(prefix_len_[i]),
                       contexts_[i].end());
    }
    return out;
  }
  const std::vector<GenerationStats>& stats() const { return stats_; }
  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < warnings_.size(); ++i) {
      for (const auto& w : warnings_[i]) out.push_back("sequence " + std::to_string(i) + ": " + w);
    }
    return out;
  }

 private:
  const RunConfig& cfg_;
  std::vector<TokenSeq> contexts_;
  std::vector<std::size_t> prefix_len_;
  std::vector<RngStream> draft_rngs_;
  std::vector<RngStream> verify_rngs_;
  std::vector<TokenSeq> pending_;
  std::vector<GenerationStats> stats_;
  std::vector<std::vector<std::string>> warnings_;
};

void validate(const RunConfig& cfg) {
  if (cfg.n == 0) throw ConfigError("n must be at least 1");
  if (cfg.max_new == 0) throw ConfigError("max new length must be at least 1");
  if (!cfg.draft_model || !cfg.target_model) throw ConfigError("run needs a draft and a target model");
  if (cfg.draft_model->vocab_size() != cfg.target_model->vocab_size()) {
    throw ConfigError("draft vocab_size " + std::to_string(cfg.draft_model->vocab_size()) +
                      " differs from target vocab_size " +
                      std::to_string(cfg.target_model->vocab_size()));
  }
  if (cfg.prefixes.size() != 1 && cfg.prefixes.size() != cfg.n) {
    throw ConfigError("expected 1 or n prefixes");
  }
  if (!cfg.draft_ticks_per_token.empty() && cfg.draft_ticks_per_token.size() != cfg.n) {
    throw ConfigError("draft_ticks_per_token needs one entry per sequence");
  }
}

RunResult run_virtual_mode(const RunConfig& cfg) {
  RoundsState<DraftResult> state(cfg.n, cfg.max_new);
  TokenExecutor exec(cfg);
  RunResult result;
  result.makespan = run_virtual(state, exec);
  result.responses = exec.responses();
  result.stats = exec.stats();
  result.warnings = exec.warnings();
  result.trace = state.take_trace();
  for (const auto& s : result.stats) {
    result.verifier_busy += s.rounds * cfg.service.verify + s.corrections * cfg.service.resample;
  }
  return result;
}

RunResult run_threaded_mode(const RunConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  RoundsState<DraftResult> state(cfg.n, cfg.max_new);
  TokenExecutor exec(cfg);
  std::mutex mu;
  std::condition_variable cv;
  std::exception_ptr failure;
  std::uint64_t last_stamp = 0;
  std::uint64_t busy_us = 0;
  const auto start = Clock::now();

  // Callers hold mu, so stamps are monotone in trace order.
  auto stamp = [&] {
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start);
    last_stamp = std::max(last_stamp, static_cast<std::uint64_t>(us.count()));
    return last_stamp;
  };
  auto fail = [&](std::exception_ptr ep) {
    std::lock_guard<std::mutex> lock(mu);
    if (!failure) failure = ep;
    cv.notify_all();
  };

  auto drafter = [&](std::size_t i) {
    try {
      for (;;) {
        {
          std::unique_lock<std::mutex> lock(mu);
          cv.wait(lock, [&] { return failure || state.progress(i).done || state.can_draft(i); });
          if (failure || state.progress(i).done) return;
          state.begin_draft(stamp(), i);
        }
        auto [payload, ticks] = exec.draft(i);
        (void)ticks;
        {
          std::lock_guard<std::mutex> lock(mu);
          state.submit(stamp(), i, std::move(payload));
        }
        cv.notify_all();
      }
    } catch (...) {
      fail(std::current_exception());
    }
  };

  auto verifier = [&] {
    try {
      for (;;) {
        std::optional<VerifyRequest<DraftResult>> req;
        std::uint64_t began = 0;
        {
          std::unique_lock<std::mutex> lock(mu);
          auto stuck = [&] {
            for (std::size_t i = 0; i < state.size(); ++i) {
              if (state.can_draft(i)) return false;
            }
            return true;
          };
          cv.wait(lock, [&] {
            return failure || state.all_done() || !state.queue_empty() || stuck();
          });
          if (failure || state.all_done()) return;
          state.check_liveness(false);
          began = stamp();
          req = state.next_request(began);
          if (!req) continue;
        }
        auto [tally, ticks] = exec.verify(*req);
        (void)ticks;
        {
          std::lock_guard<std::mutex> lock(mu);
          const std::uint64_t ended = stamp();
          busy_us += ended - began;
          const std::size_t kept = state.complete(ended, req->sequence, tally);
          exec.commit(req->sequence, kept);
        }
        cv.notify_all();
      }
    } catch (...) {
      fail(std::current_exception());
    }
  };

  std::vector<std::thread> drafters;
  drafters.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) drafters.emplace_back(drafter, i);
  verifier();
  for (auto& t : drafters) t.join();
  if (failure) std::rethrow_exception(failure);

  RunResult result;
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  result.makespan = last_stamp;
  result.verifier_busy = busy_us;
  result.responses = exec.responses();
  result.stats = exec.stats();
  result.warnings = exec.warnings();
  result.trace = state.take_trace();
  return result;
}

}  // namespace

std::string to_string(ExecutionMode mode) {
  return mode == ExecutionMode::kThreaded ? "threaded" : "virtual";
}

ExecutionMode execution_mode_from_string(const std::string& name) {
  if (name == "virtual" || name == "virtual-time") return ExecutionMode::kVirtual;
  if (name == "threaded") return ExecutionMode::kThreaded;
  throw ConfigError("unknown execution mode '" + name + "'");
}

std::size_t RunResult::requests_verified() const {
  std::size_t total = 0;
  for (const auto& s : stats) total += s.rounds;
  return total;
}

GenerationStats RunResult::totals() const {
  GenerationStats t;
  for (const auto& s : stats) {
    t.rounds += s.rounds;
    t.drafted += s.drafted;
    t.accepted += s.accepted;
    t.corrections += s.corrections;
    t.emitted += s.emitted;
  }
  return t;
}

RunResult run(const RunConfig& config) {
  validate(config);
  return config.mode == ExecutionMode::kThreaded ? run_threaded_mode(config)
                                                 : run_virtual_mode(config);
}

}  // namespace specsched
