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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "specsched/distribution.hpp"
#include "specsched/errors.hpp"
#include "specsched/model.hpp"
#include "specsched/rng.hpp"

using namespace specsched;

TEST_CASE("rng streams are counter based") {
  RngStream a(7, {3, Phase::kDraft});
  RngStream b(7, {3, Phase::kDraft});
  RngStream other_phase(7, {3, Phase::kVerify});
  RngStream other_seq(7, {4, Phase::kDraft});
  RngStream other_seed(8, {3, Phase::kDraft});
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != other_phase.next_u64());
    CHECK(x != other_seq.next_u64());
    CHECK(x != other_seed.next_u64());
  }
  CHECK(a.draws() == 100);

  RngStream u(1, {0, Phase::kMonteCarlo});
  for (int i = 0; i < 1000; ++i) {
    const double x = u.next_unit();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(derive_seed(5, 0) != derive_seed(5, 1));
  CHECK(derive_seed(5, 1) == derive_seed(5, 1));
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(Distribution({0.5, 0.6}), ContractViolation);
  CHECK_THROWS_AS(Distribution({-0.1, 1.1}), ContractViolation);
  CHECK_THROWS_AS(Distribution::normalized({0.0, 0.0}), ContractViolation);
  CHECK_NOTHROW(Distribution({0.5, 0.5 + 1e-12}));
  const Distribution d = Distribution::normalized({1.0, 3.0});
  CHECK(d[0] == doctest::Approx(0.25));
  CHECK(d.support_size() == 2);
  CHECK(Distribution::point_mass(4, 2).support_size() == 1);
  CHECK(Distribution::uniform(4)[3] == doctest::Approx(0.25));
}

TEST_CASE("temperature") {
  const Distribution p({0.5, 0.3, 0.2});
  const Distribution same = p.with_temperature(1.0);
  for (TokenId i = 0; i < 3; ++i) CHECK(same[i] == doctest::Approx(p[i]).epsilon(1e-15));
  const Distribution cold = p.with_temperature(0.5);
  // p^2 normalized: 0.25, 0.09, 0.04 over 0.38
  CHECK(cold[0] == doctest::Approx(0.25 / 0.38));
  CHECK(cold[2] == doctest::Approx(0.04 / 0.38));
  const Distribution zero({0.0, 1.0});
  CHECK(zero.with_temperature(2.0)[0] == 0.0);
  CHECK_THROWS_AS(p.with_temperature(0.0), InputError);
}

TEST_CASE("sample") {
  const Distribution point({1.0, 0.0, 0.0});
  RngStream rng(3, {0, Phase::kMonteCarlo});
  for (int i = 0; i < 1000; ++i) CHECK(sample(point, rng) == 0);

  RngStream again1(9, {1, Phase::kDraft});
  RngStream again2(9, {1, Phase::kDraft});
  const Distribution u = Distribution::uniform(5);
  CHECK(sample(u, again1) == sample(u, again2));

  // Fair coin: 10^5 draws; the spec band [0.494, 0.506] is about 3.8 sigma.
  const Distribution coin({0.5, 0.5});
  RngStream c(11, {0, Phase::kMonteCarlo});
  std::size_t zeros = 0;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) zeros += sample(coin, c) == 0;
  const double f = static_cast<double>(zeros) / n;
  CHECK(f >= 0.494);
  CHECK(f <= 0.506);
  CHECK(c.draws() == n);

  const std::vector<double> none{0.0, 0.0};
  CHECK_THROWS_AS(sample_weights(none, c), ContractViolation);
}

TEST_CASE("total variation") {
  const std::vector<double> a{0.5, 0.5, 0.0}, b{0.0, 0.5, 0.5};
  CHECK(total_variation(a, b) == doctest::Approx(0.5));
  CHECK(total_variation(a, a) == 0.0);
}

TEST_CASE("lookup table model ignores context") {
  LookupTableModel m({0.5, 0.3, 0.2});
  const TokenSeq ctx1{0, 1}, ctx2{2, 2, 2};
  for (const TokenSeq& ctx : {TokenSeq{}, ctx1, ctx2}) {
    const Distribution d = m.next_distribution(ctx);
    CHECK(d[0] == doctest::Approx(0.5));
    CHECK(d[1] == doctest::Approx(0.3));
    CHECK(d[2] == doctest::Approx(0.2));
  }
}

TEST_CASE("bigram counts on ababab") {
  // a=0, b=1. After 'a': b three times, a never. Add-one: (3+1)/(3+2).
  const TokenSeq corpus{0, 1, 0, 1, 0, 1};
  NGramModel m(2, 2, corpus);
  const TokenSeq ends_a{1, 0};
  CHECK(m.next_distribution(ends_a)[1] == doctest::Approx(0.8).epsilon(1e-12));
  // After 'b': a twice, b never -> (2+1)/(2+2).
  const TokenSeq ends_b{0, 1};
  CHECK(m.next_distribution(ends_b)[0] == doctest::Approx(0.75).epsilon(1e-12));
  // Empty context backs off to unigrams: 3 a, 3 b.
  CHECK(m.next_distribution({})[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("context validation") {
  LookupTableModel m({0.5, 0.5}, 1.0, 4);
  const TokenSeq bad_token{0, 2};
  CHECK_THROWS_AS(m.next_distribution(bad_token), InputError);
  const TokenSeq too_long{0, 0, 0, 0, 0};
  CHECK_THROWS_AS(m.next_distribution(too_long), InputError);
  const TokenSeq ok{0, 0, 0, 0};
  CHECK_NOTHROW(m.next_distribution(ok));
}

TEST_CASE("smoothed uniform model mixes toward uniform") {
  auto base = std::make_shared<LookupTableModel>(std::vector<double>{1.0, 0.0});
  SmoothedUniformModel m(base, 0.5);
  const Distribution d = m.next_distribution({});
  CHECK(d[0] == doctest::Approx(0.75));
  CHECK(d[1] == doctest::Approx(0.25));
}

TEST_CASE("make_model and corpora") {
  ModelSpec spec;
  spec.kind = ModelKind::kNGram;
  spec.vocab_size = 6;
  spec.order = 3;
  spec.seed = 4;
  ModelPtr a = make_model(spec);
  ModelPtr b = make_model(spec);
  const TokenSeq ctx{1, 2};
  CHECK(a->next_distribution(ctx) == b->next_distribution(ctx));
  CHECK(a->vocab_size() == 6);

  const TokenSeq corpus = synthesize_corpus(6, 500, 4);
  CHECK(corpus.size() == 500);
  for (TokenId t : corpus) CHECK(t < 6);

  ModelSpec lookup;
  lookup.vocab_size = 5;
  lookup.seed = 1;
  CHECK(make_model(lookup)->next_distribution({}).size() == 5);

  const auto dir = std::filesystem::temp_directory_path() / "specsched_lm_core";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "good.txt") << "0 1 2\n3 1\n";
    std::ofstream(dir / "range.txt") << "0 1 9\n";
    std::ofstream(dir / "junk.txt") << "0 x 1\n";
  }
  CHECK(load_corpus(dir / "good.txt", 4) == TokenSeq{0, 1, 2, 3, 1});
  CHECK_THROWS_AS(load_corpus(dir / "range.txt", 4), InputError);
  CHECK_THROWS_AS(load_corpus(dir / "junk.txt", 4), InputError);
  CHECK_THROWS_AS(load_corpus(dir / "missing.txt", 4), InputError);

  CHECK(model_kind_from_string(to_string(ModelKind::kSmoothedUniform)) ==
        ModelKind::kSmoothedUniform);
  CHECK_THROWS_AS(model_kind_from_string("transformer"), ConfigError);
}
