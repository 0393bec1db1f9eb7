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

#include "specsched/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "specsched/errors.hpp"

namespace specsched {

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw ContractViolation("distribution over an empty vocabulary");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ContractViolation("distribution has a negative or non-finite entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw ContractViolation("distribution sums to " + std::to_string(total));
  }
}

Distribution Distribution::normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ContractViolation("negative or non-finite weight");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw ContractViolation("all-zero weight vector cannot be normalized");
  }
  for (double& w : weights) w /= total;
  return Distribution(std::move(weights));
}

Distribution Distribution::uniform(std::size_t vocab) {
  return Distribution(std::vector<double>(vocab, 1.0 / static_cast<double>(vocab)));
}

Distribution Distribution::point_mass(std::size_t vocab, TokenId id) {
  if (id >= vocab) throw InputError("point mass outside the vocabulary");
  std::vector<double> p(vocab, 0.0);
  p[id] = 1.0;
  return Distribution(std::move(p));
}

std::size_t Distribution::support_size() const {
  return static_cast<std::size_t>(
      std::count_if(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; }));
}

Distribution Distribution::with_temperature(double temperature) const {
  if (!(temperature > 0.0)) throw InputError("temperature must be positive");
  if (temperature == 1.0) return *this;
  // Work in log space so small temperatures do not underflow to all-zero.
  const double inv_t = 1.0 / temperature;
  double max_log = -std::numeric_limits<double>::infinity();
  for (double p : probs_) {
    if (p > 0.0) max_log = std::max(max_log, std::log(p));
  }
  std::vector<double> w(probs_.size(), 0.0);
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] > 0.0) w[i] = std::exp((std::log(probs_[i]) - max_log) * inv_t);
  }
  return normalized(std::move(w));
}

TokenId sample_weights(std::span<const double> weights, RngStream& rng) {
  const double u = rng.next_unit();
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (weights.empty() || !(total > 0.0)) {
    throw ContractViolation("cannot sample from an all-zero distribution");
  }
  const double target = u * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    cumulative += weights[i];
    if (target < cumulative) return static_cast<TokenId>(i);
  }
  // Rounding left target at or past the final cumulative sum.
  return static_cast<TokenId>(last_positive);
}

TokenId sample(const Distribution& dist, RngStream& rng) {
  if (dist.empty()) throw ContractViolation("cannot sample from an empty distribution");
  return sample_weights(dist.probs(), rng);
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("total variation over mismatched supports");
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

}  // namespace specsched
