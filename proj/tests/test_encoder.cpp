/* Copyright 2026 The spkcls Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <cstring>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "spkcls/encoder.hpp"
#include "spkcls/errors.hpp"
#include "spkcls/speaker_models.hpp"

namespace spkcls {
namespace {

using G = Graph<double>;

struct Net {
  ParamStore<double> store;
  EncoderParams<double> enc;
  AttentionParams<double> att;

  explicit Net(std::size_t d = 5, std::size_t vocab = 20, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    init_uniform(store.add("emb", {vocab, d}), 0.5, rng);
    enc.embeddings = &store.get("emb");
    enc.word = add_lstm(store, "word", d, d, 0.5, rng);
    enc.sentence = add_lstm(store, "sentence", d, d, 0.5, rng);
    enc.dim = d;
    att = add_attention(store, "att", d, 0.5, rng);
  }
};

std::vector<double> values(G& g, Var v) { return {g.value(v).begin(), g.value(v).end()}; }

TEST_CASE("lstm parameters follow the init contract") {
  Net n(4);
  const auto& b = n.enc.word.bias->value.values;
  REQUIRE(b.size() == 16);
  for (std::size_t i = 0; i < 16; ++i) CHECK(b[i] == ((i >= 4 && i < 8) ? 1.0 : 0.0));
  CHECK(n.enc.word.weights->value.shape == Shape{16, 8});
  for (double w : n.enc.word.weights->value.values) CHECK(std::abs(w) <= 0.5);
}

TEST_CASE("a one-token sentence is one cell step from the zero state") {
  Net n;
  G g;
  BoundEncoder e = bind(g, n.enc);
  const std::vector<TokenId> one{3};
  Var v = encode_sentence(g, e, std::span<const TokenId>(one));
  Var step = g.lstm_cell(g.row(e.embeddings, 3), g.zeros({10, 1}), e.word.weights, e.word.bias);
  CHECK(values(g, v) == values(g, g.slice(step, 0, 5)));
}

TEST_CASE("sentence encoding is deterministic and order sensitive") {
  Net n;
  G g;
  BoundEncoder e = bind(g, n.enc);
  const std::vector<TokenId> s{1, 2, 3, 4, 5};
  const std::vector<TokenId> p{5, 4, 3, 2, 1};
  auto a = values(g, encode_sentence(g, e, std::span<const TokenId>(s)));
  auto b = values(g, encode_sentence(g, e, std::span<const TokenId>(s)));
  auto c = values(g, encode_sentence(g, e, std::span<const TokenId>(p)));
  CHECK(a == b);
  CHECK(a != c);
  CHECK_THROWS_AS(encode_sentence(g, e, std::span<const TokenId>()), ContractError);
}

TEST_CASE("block encoding") {
  Net n;
  G g;
  BoundEncoder e = bind(g, n.enc);
  std::vector<SentenceIds> one{{1, 2}};
  Var block = encode_block(g, e, std::span<const SentenceIds>(one));
  Var sv = encode_sentence(g, e, std::span<const TokenId>(one[0]));
  Var step = g.lstm_cell(sv, g.zeros({10, 1}), e.sentence.weights, e.sentence.bias);
  CHECK(values(g, block) == values(g, g.slice(step, 0, 5)));

  std::vector<SentenceIds> three{{1}, {2, 3, 4}, {5, 6}};
  Var b3 = encode_block(g, e, std::span<const SentenceIds>(three));
  CHECK(g.shape(b3) == Shape{5, 1});
  CHECK(values(g, b3) == values(g, encode_block(g, e, std::span<const SentenceIds>(three))));
  CHECK_THROWS_AS(encode_block(g, e, std::span<const SentenceIds>()), ContractError);
}

TEST_CASE("static attention") {
  Net n;
  std::mt19937_64 rng(3);
  SUBCASE("a single sentence gets weight one and reduces to encode_block") {
    G g;
    BoundEncoder e = bind(g, n.enc);
    BoundAttention a = bind(g, n.att);
    std::vector<SentenceIds> one{{7, 8, 9}};
    Var s = g.constant({5, 1}, {0.1, -0.2, 0.3, 0.4, -0.5});
    AttentionResult r = static_attention(g, e, a, std::span<const SentenceIds>(one), s);
    CHECK(g.value(r.weights)[0] == 1.0);
    CHECK(values(g, r.output) == values(g, encode_block(g, e, std::span<const SentenceIds>(one))));
  }
  SUBCASE("uniform logits feed the mean sentence vector to the last step") {
    std::fill(n.att.score->value.values.begin(), n.att.score->value.values.end(), 0.0);
    G g;
    BoundEncoder e = bind(g, n.enc);
    BoundAttention a = bind(g, n.att);
    std::vector<SentenceIds> sents{{1, 2}, {3}, {4, 5, 6}};
    Var s = g.constant({5, 1}, {1, 1, 1, 1, 1});
    AttentionResult r = static_attention(g, e, a, std::span<const SentenceIds>(sents), s);
    for (double w : g.value(r.weights)) CHECK(w == doctest::Approx(1.0 / 3).epsilon(1e-15));

    std::vector<double> mean(5, 0.0);
    std::vector<Var> vecs;
    for (const auto& sent : sents) {
      vecs.push_back(encode_sentence(g, e, std::span<const TokenId>(sent)));
      for (std::size_t i = 0; i < 5; ++i) mean[i] += g.value(vecs.back())[i] / 3;
    }
    Var state = g.zeros({10, 1});
    state = g.lstm_cell(vecs[0], state, e.sentence.weights, e.sentence.bias);
    state = g.lstm_cell(vecs[1], state, e.sentence.weights, e.sentence.bias);
    state = g.lstm_cell(g.constant({5, 1}, mean), state, e.sentence.weights, e.sentence.bias);
    auto want = values(g, g.slice(state, 0, 5));
    auto got = values(g, r.output);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-14);
  }
  SUBCASE("weights sum to one on random shapes") {
    for (int trial = 0; trial < 100; ++trial) {
      G g;
      BoundEncoder e = bind(g, n.enc);
      BoundAttention a = bind(g, n.att);
      auto sample = testing::random_sample(rng, 20, 1, 6);
      std::vector<double> sv(5);
      for (auto& x : sv) x = std::uniform_real_distribution<double>(-2, 2)(rng);
      AttentionResult r = static_attention(g, e, a, std::span<const SentenceIds>(sample.current),
                                           g.constant({5, 1}, sv));
      double total = 0;
      for (double w : g.value(r.weights)) total += w;
      CHECK(std::abs(total - 1.0) < 1e-9);
      CHECK(g.shape(r.weights).rows == sample.current.size());
    }
  }
}

TEST_CASE("speaker models") {
  Net n;
  G g;
  Var table = g.constant({3, 2}, {1, 2, 3, 4, 5, 6});
  CHECK(values(g, temporal_speaker_vector(g, table, 2)) == std::vector<double>{3, 4});
  CHECK_THROWS_AS(temporal_speaker_vector(g, table, 0), ContractError);
  CHECK_THROWS_AS(temporal_speaker_vector(g, table, 4), ContractError);

  Var u = g.constant({2, 1}, {1, -1});
  Var s[] = {g.constant({2, 1}, {2, 0}), g.constant({2, 1}, {0, 2}), g.constant({2, 1}, {1, 1})};
  Var logits = candidate_logits(g, u, s);
  CHECK(values(g, logits) == std::vector<double>{2, -2, 0});
  Var p = score_candidates(g, u, s);
  double total = 0;
  for (double x : g.value(p)) total += x;
  CHECK(std::abs(total - 1) < 1e-15);
  Var bad[] = {g.constant({3, 1}, {1, 1, 1})};
  CHECK_THROWS_AS(score_candidates(g, u, bad), DimensionError);
  CHECK_THROWS_AS(score_candidates(g, u, std::span<const Var>()), ContractError);

  EncodedCandidate cand{1, {{1, 2}, {3}, {4}}};
  BoundEncoder e = bind(g, n.enc);
  CHECK(values(g, content_speaker_vector(g, e, cand)) ==
        values(g, encode_block(g, e, std::span<const SentenceIds>(cand.history))));
}

TEST_CASE("predict breaks ties toward the most recent speaker") {
  const std::vector<double> tie{0.5, 0.5};
  CHECK(predict(tie) == 0);
  const std::vector<double> p{0.2, 0.3, 0.3, 0.2};
  CHECK(predict(p) == 1);
  const std::vector<double> one{1.0};
  CHECK(predict(one) == 0);
}

TEST_CASE("validate_distribution") {
  validate_distribution(std::vector<double>{0.25, 0.75});
  CHECK_THROWS_AS(validate_distribution(std::vector<double>{0.0, 1.0}), ContractError);
  validate_distribution(std::vector<double>{0.0, 1.0}, 1e-9, false);
  CHECK_THROWS_AS(validate_distribution(std::vector<double>{0.5, 0.6}), ContractError);
  CHECK_THROWS_AS(validate_distribution(std::vector<double>{}), ContractError);
}

}  // namespace
}  // namespace spkcls
