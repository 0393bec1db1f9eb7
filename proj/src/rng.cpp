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

#include "specsched/rng.hpp"

namespace specsched {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(mix64(base ^ 0x5851F42D4C957F2DULL) + (index + 1) * kGolden);
}

RngStream::RngStream(std::uint64_t seed, StreamId id) : seed_(seed), id_(id) {
  std::uint64_t k = mix64(seed + kGolden);
  k = mix64(k ^ (id.sequence * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  k = mix64(k ^ (static_cast<std::uint64_t>(id.phase) * 0xABC98388FB8FAC03ULL));
  key_ = k;
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

}  // namespace specsched
