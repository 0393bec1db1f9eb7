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

#include "specsched/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "specsched/errors.hpp"

namespace specsched {

LanguageModel::LanguageModel(std::size_t vocab_size, double temperature,
                             std::size_t max_context)
    : vocab_size_(vocab_size), temperature_(temperature), max_context_(max_context) {
  if (vocab_size == 0) throw InputError("vocab_size must be positive");
  if (!(temperature > 0.0)) throw InputError("temperature must be positive");
}

Distribution LanguageModel::next_distribution(std::span<const TokenId> context) const {
  if (context.size() > max_context_) {
    throw InputError("context of " + std::to_string(context.size()) +
                     " tokens exceeds max_context " + std::to_string(max_context_));
  }
  for (TokenId t : context) {
    if (t >= vocab_size_) {
      throw InputError("token " + std::to_string(t) + " outside vocabulary of size " +
                       std::to_string(vocab_size_));
    }
  }
  return Distribution::normalized(raw_weights(context)).with_temperature(temperature_);
}

LookupTableModel::LookupTableModel(std::vector<double> row, double temperature,
                                   std::size_t max_context)
    : LanguageModel(row.size(), temperature, max_context), row_(std::move(row)) {
  // Validates non-negativity and positive mass up front.
  (void)Distribution::normalized(row_);
}

std::vector<double> LookupTableModel::raw_weights(std::span<const TokenId>) const {
  return row_;
}

NGramModel::NGramModel(std::size_t order, std::size_t vocab_size,
                       std::span<const TokenId> corpus, double temperature,
                       std::size_t max_context)
    : LanguageModel(vocab_size, temperature, max_context), order_(order), histories_(order) {
  if (order == 0) throw InputError("n-gram order must be positive");
  for (TokenId t : corpus) {
    if (t >= vocab_size) {
      throw InputError("corpus token " + std::to_string(t) + " outside vocabulary");
    }
  }
  for (std::size_t j = 0; j < corpus.size(); ++j) {
    for (std::size_t m = 0; m < order && m <= j; ++m) {
      TokenSeq history(corpus.begin() + static_cast<std::ptrdiff_t>(j - m),
                       corpus.begin() + static_cast<std::ptrdiff_t>(j));
      Row& row = histories_[m][history];
      if (row.counts.empty()) row.counts.assign(vocab_size, 0);
      ++row.counts[corpus[j]];
      ++row.total;
    }
  }
}

std::vector<double> NGramModel::raw_weights(std::span<const TokenId> context) const {
  const std::size_t m = std::min(order_ - 1, context.size());
  const TokenSeq history(context.end() - static_cast<std::ptrdiff_t>(m), context.end());
  const double v = static_cast<double>(vocab_size());
  std::vector<double> w(vocab_size(), 1.0 / v);
  auto it = histories_[m].find(history);
  if (it == histories_[m].end()) return w;
  const double denom = static_cast<double>(it->second.total) + v;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = (static_cast<double>(it->second.counts[i]) + 1.0) / denom;
  }
  return w;
}

SmoothedUniformModel::SmoothedUniformModel(ModelPtr base, double mix, double temperature,
                                           std::size_t max_context)
    : LanguageModel(base ? base->vocab_size() : 0, temperature, max_context),
      base_(std::move(base)),
      mix_(mix) {
  if (!(mix >= 0.0 && mix <= 1.0)) throw InputError("mix must lie in [0, 1]");
}

std::vector<double> SmoothedUniformModel::raw_weights(std::span<const TokenId> context) const {
  const Distribution base = base_->next_distribution(context);
  const double uniform = mix_ / static_cast<double>(vocab_size());
  std::vector<double> w(vocab_size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = (1.0 - mix_) * base[static_cast<TokenId>(i)] + uniform;
  }
  return w;
}

TokenSeq load_corpus(const std::filesystem::path& path, std::size_t vocab_size) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus file " + path.string());
  TokenSeq tokens;
  std::string word;
  while (in >> word) {
    std::size_t consumed = 0;
    unsigned long long value = 0;
    try {
      value = std::stoull(word, &consumed);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (consumed != word.size() || word.front() == '-') {
      throw InputError("corpus " + path.string() + " holds non-integer token '" + word + "'");
    }
    if (value >= vocab_size) {
      throw InputError("corpus token " + word + " outside vocabulary of size " +
                       std::to_string(vocab_size));
    }
    tokens.push_back(static_cast<TokenId>(value));
  }
  return tokens;
}

TokenSeq synthesize_corpus(std::size_t vocab_size, std::size_t length, std::uint64_t seed) {
  RngStream rng(seed, {0, Phase::kCorpus});
  // Cubing uniforms skews each row towards a few preferred successors.
  std::vector<std::vector<double>> transitions(vocab_size, std::vector<double>(vocab_size));
  for (auto& row : transitions) {
    for (double& w : row) {
      const double u = rng.next_unit();
      w = u * u * u + 0.01;
    }
  }
  TokenSeq corpus;
  corpus.reserve(length);
  TokenId current = static_cast<TokenId>(rng.next_u64() % vocab_size);
  for (std::size_t i = 0; i < length; ++i) {
    corpus.push_back(current);
    current = sample_weights(transitions[current], rng);
  }
  return corpus;
}

ModelPtr make_model(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::kLookupTable: {
      std::vector<double> row;
      if (spec.row) {
        row = *spec.row;
        if (spec.vocab_size != 0 && row.size() != spec.vocab_size) {
          throw ConfigError("lookup-table row length differs from vocab_size");
        }
      } else {
        if (spec.vocab_size == 0) throw ConfigError("lookup-table needs vocab_size or row");
        RngStream rng(spec.seed, {0, Phase::kCorpus});
        row.resize(spec.vocab_size);
        for (double& w : row) w = rng.next_unit() + 0.05;
      }
      return std::make_shared<LookupTableModel>(std::move(row), spec.temperature,
                                                spec.max_context);
    }
    case ModelKind::kNGram: {
      if (spec.vocab_size == 0) throw ConfigError("ngram model needs vocab_size");
      TokenSeq corpus;
      if (spec.corpus) {
        corpus = *spec.corpus;
      } else if (spec.corpus_path) {
        corpus = load_corpus(*spec.corpus_path, spec.vocab_size);
      } else {
        corpus = synthesize_corpus(spec.vocab_size, 48 * spec.vocab_size * spec.order, spec.seed);
      }
      return std::make_shared<NGramModel>(spec.order, spec.vocab_size, corpus, spec.temperature,
                                          spec.max_context);
    }
    case ModelKind::kSmoothedUniform: {
      if (!spec.base) throw ConfigError("smoothed-uniform model needs a base model");
      ModelPtr base = make_model(*spec.base);
      if (spec.vocab_size != 0 && spec.vocab_size != base->vocab_size()) {
        throw ConfigError("smoothed-uniform vocab_size differs from its base");
      }
      return std::make_shared<SmoothedUniformModel>(std::move(base), spec.mix, spec.temperature,
                                                    spec.max_context);
    }
  }
  throw ConfigError("unknown model kind");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLookupTable:
      return "lookup-table";
    case ModelKind::kNGram:
      return "ngram";
    case ModelKind::kSmoothedUniform:
      return "smoothed-uniform";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "lookup-table") return ModelKind::kLookupTable;
  if (name == "ngram") return ModelKind::kNGram;
  if (name == "smoothed-uniform") return ModelKind::kSmoothedUniform;
  throw ConfigError("unknown model kind '" + name + "'");
}

}  // namespace specsched
