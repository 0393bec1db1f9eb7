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
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specsched/distribution.hpp"

namespace specsched {

// Token-level language model contract. Implementations are immutable after
// construction and may be shared across threads.
class LanguageModel {
 public:
  static constexpr std::size_t kDefaultMaxContext = 512;

  virtual ~LanguageModel() = default;

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t max_context() const { return max_context_; }
  double temperature() const { return temperature_; }

  // Validates the context, then applies temperature to the model's raw
  // distribution. Deterministic in (model, context).
  Distribution next_distribution(std::span<const TokenId> context) const;

 protected:
  LanguageModel(std::size_t vocab_size, double temperature, std::size_t max_context);

  // Unnormalized non-negative weights of length vocab_size(); the context has
  // already been validated.
  virtual std::vector<double> raw_weights(std::span<const TokenId> context) const = 0;

 private:
  std::size_t vocab_size_;
  double temperature_;
  std::size_t max_context_;
};

using ModelPtr = std::shared_ptr<const LanguageModel>;

// Context-independent model with one fixed row.
class LookupTableModel final : public LanguageModel {
 public:
  LookupTableModel(std::vector<double> row, double temperature = 1.0,
                   std::size_t max_context = kDefaultMaxContext);

 protected:
  std::vector<double> raw_weights(std::span<const TokenId> context) const override;

 private:
  std::vector<double> row_;
};

// Add-one smoothed n-gram counts. The history is the last min(order-1,
// |context|) tokens; shorter histories back off to lower-order counts
// collected from the same corpus:
//   P(w | h) = (count(h, w) + 1) / (count(h) + V)
class NGramModel final : public LanguageModel {
 public:
  NGramModel(std::size_t order, std::size_t vocab_size, std::span<const TokenId> corpus,
             double temperature = 1.0, std::size_t max_context = kDefaultMaxContext);

  std::size_t order() const { return order_; }

 protected:
  std::vector<double> raw_weights(std::span<const TokenId> context) const override;

 private:
  struct Row {
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
  };

  std::size_t order_;
  // histories_[m] maps an m-token history to its successor counts.
  std::vector<std::map<TokenSeq, Row>> histories_;
};

// (1 - mix) * base + mix * uniform. Used to derive a draft model from a
// target with a controllable proficiency gap.
class SmoothedUniformModel final : public LanguageModel {
 public:
  SmoothedUniformModel(ModelPtr base, double mix, double temperature = 1.0,
                       std::size_t max_context = kDefaultMaxContext);

  double mix() const { return mix_; }

 protected:
  std::vector<double> raw_weights(std::span<const TokenId> context) const override;

 private:
  ModelPtr base_;
  double mix_;
};

enum class ModelKind { kLookupTable, kNGram, kSmoothedUniform };

struct ModelSpec {
  ModelKind kind = ModelKind::kLookupTable;
  std::size_t vocab_size = 0;
  std::uint64_t seed = 0;
  double temperature = 1.0;
  std::size_t max_context = LanguageModel::kDefaultMaxContext;

  // lookup-table: explicit row; when absent a random row is drawn from seed.
  std::optional<std::vector<double>> row;
  // ngram: order plus a corpus given inline or as a file of whitespace
  // separated token ids. With neither, a corpus is synthesized from seed.
  std::size_t order = 2;
  std::optional<TokenSeq> corpus;
  std::optional<std::filesystem::path> corpus_path;
  // smoothed-uniform
  double mix = 0.0;
  std::shared_ptr<ModelSpec> base;
};

ModelPtr make_model(const ModelSpec& spec);

TokenSeq load_corpus(const std::filesystem::path& path, std::size_t vocab_size);

// Markov-chain corpus with skewed, seed-dependent transitions; gives
// synthesized n-gram models real context dependence.
TokenSeq synthesize_corpus(std::size_t vocab_size, std::size_t length, std::uint64_t seed);

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

}  // namespace specsched
