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

namespace specsched {

// Phase tags partition the random streams owned by one sequence so that
// drafting and verification never share draws.
enum class Phase : std::uint32_t {
  kDraft = 1,
  kVerify = 2,
  kTiming = 3,
  kCorpus = 4,
  kMonteCarlo = 5,
};

struct StreamId {
  std::uint64_t sequence = 0;
  Phase phase = Phase::kDraft;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

// Counter-based generator: draw j of stream (seed, id) is a pure function of
// (seed, id, j). Two streams with equal keys replay identically regardless
// of how other streams are interleaved with them.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamId id);

  std::uint64_t next_u64();
  // Uniform double in [0, 1) with 53 random bits; consumes one draw.
  double next_unit();

  std::uint64_t draws() const { return counter_; }
  StreamId id() const { return id_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  StreamId id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Seed for the index-th child computation of a run seeded with `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace specsched
