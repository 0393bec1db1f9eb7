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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "specsched/rng.hpp"

namespace specsched {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

// Probability vector over a vocabulary. A constructed Distribution is always
// valid: non-negative entries summing to 1 within kSumTolerance. The default
// state is empty and only serves as a placeholder.
class Distribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  Distribution() = default;
  explicit Distribution(std::vector<double> probs);

  // Divides by the total mass. Throws ContractViolation on negative entries
  // or zero total mass.
  static Distribution normalized(std::vector<double> weights);
  static Distribution uniform(std::size_t vocab);
  static Distribution point_mass(std::size_t vocab, TokenId id);

  std::size_t size() const { return probs_.size(); }
  bool empty() const { return probs_.empty(); }
  double operator[](TokenId id) const { return probs_[id]; }
  std::span<const double> probs() const { return probs_; }
  std::size_t support_size() const;

  // probs^(1/T), renormalized.
  Distribution with_temperature(double temperature) const;

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
};

// Draws a token with probability probs[id]. Consumes exactly one draw.
TokenId sample(const Distribution& dist, RngStream& rng);

// Draws from `weights` restricted to entries with positive weight, without
// requiring normalization. Consumes exactly one draw.
TokenId sample_weights(std::span<const double> weights, RngStream& rng);

double total_variation(std::span<const double> a, std::span<const double> b);

}  // namespace specsched
