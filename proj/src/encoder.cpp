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
#include "spkcls/encoder.hpp"

#include <vector>

#include "spkcls/errors.hpp"

namespace spkcls {

template <typename Real>
LstmParams<Real> add_lstm(ParamStore<Real>& store, const std::string& prefix,
                          std::size_t input_dim, std::size_t hidden_dim,
                          Real init_bound, std::mt19937_64& rng) {
  LstmParams<Real> p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.weights = &store.add(prefix + "/W", Shape{4 * hidden_dim, input_dim + hidden_dim});
  init_uniform(*p.weights, init_bound, rng);
  p.bias = &store.add(prefix + "/b", Shape{4 * hidden_dim, 1});
  for (std::size_t j = hidden_dim; j < 2 * hidden_dim; ++j) {
    p.bias->value.values[j] = Real(1);
  }
  return p;
}

template <typename Real>
AttentionParams<Real> add_attention(ParamStore<Real>& store, const std::string& prefix,
                                    std::size_t dim, Real init_bound,
                                    std::mt19937_64& rng) {
  AttentionParams<Real> p;
  p.sentence_proj = &store.add(prefix + "/sentence_proj", Shape{dim, dim});
  init_uniform(*p.sentence_proj, init_bound, rng);
  p.speaker_proj = &store.add(prefix + "/speaker_proj", Shape{dim, dim});
  init_uniform(*p.speaker_proj, init_bound, rng);
  p.score = &store.add(prefix + "/score", Shape{dim, 1});
  init_uniform(*p.score, init_bound, rng);
  return p;
}

template <typename Real>
BoundEncoder bind(Graph<Real>& g, const EncoderParams<Real>& p) {
  BoundEncoder b;
  b.embeddings = g.param(*p.embeddings);
  b.word = {g.param(*p.word.weights), g.param(*p.word.bias), p.word.hidden_dim};
  b.sentence = {g.param(*p.sentence.weights), g.param(*p.sentence.bias),
                p.sentence.hidden_dim};
  b.dim = p.dim;
  return b;
}

template <typename Real>
BoundAttention bind(Graph<Real>& g, const AttentionParams<Real>& p) {
  return {g.param(*p.sentence_proj), g.param(*p.speaker_proj), g.param(*p.score)};
}

template <typename Real>
Var run_lstm(Graph<Real>& g, const BoundLstm& cell, std::span<const Var> inputs) {
  Var state = g.zeros(Shape{2 * cell.hidden_dim, 1});
  for (Var x : inputs) state = g.lstm_cell(x, state, cell.weights, cell.bias);
  return state;
}

template <typename Real>
Var encode_sentence(Graph<Real>& g, const BoundEncoder& enc,
                    std::span<const TokenId> tokens, Real dropout) {
  if (tokens.empty()) throw ContractError("encode_sentence: empty sentence");
  Var state = g.zeros(Shape{2 * enc.word.hidden_dim, 1});
  for (TokenId id : tokens) {
    if (id < 0) throw ContractError("encode_sentence: negative token id");
    Var x = g.dropout(g.row(enc.embeddings, static_cast<std::size_t>(id)), dropout);
    state = g.lstm_cell(x, state, enc.word.weights, enc.word.bias);
  }
  return g.slice(state, 0, enc.word.hidden_dim);
}

namespace {

template <typename Real>
std::vector<Var> SentenceVectors(Graph<Real>& g, const BoundEncoder& enc,
                                 std::span<const SentenceIds> sentences, Real dropout) {
  if (sentences.empty()) throw ContractError("encode_block: empty block");
  std::vector<Var> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(encode_sentence(g, enc, std::span(s), dropout));
  return out;
}

}  // namespace

template <typename Real>
Var encode_block(Graph<Real>& g, const BoundEncoder& enc,
                 std::span<const SentenceIds> sentences, Real dropout) {
  const std::vector<Var> vecs = SentenceVectors(g, enc, sentences, dropout);
  const Var state = run_lstm(g, enc.sentence, std::span<const Var>(vecs));
  return g.dropout(g.slice(state, 0, enc.sentence.hidden_dim), dropout);
}

template <typename Real>
AttentionResult static_attention(Graph<Real>& g, const BoundEncoder& enc,
                                 const BoundAttention& att,
                                 std::span<const SentenceIds> sentences,
                                 Var speaker_vector, Real dropout) {
  const std::vector<Var> vecs = SentenceVectors(g, enc, sentences, dropout);
  const Var speaker_term = g.matmul(att.speaker_proj, speaker_vector);
  std::vector<Var> logits;
  logits.reserve(vecs.size());
  for (Var v : vecs) {
    const Var hidden = g.tanh(g.add(g.matmul(att.sentence_proj, v), speaker_term));
    logits.push_back(g.matmul(g.transpose(att.score), hidden));
  }
  const Var weights = g.softmax(g.concat(std::span<const Var>(logits)));
  const Var stacked = g.stack(std::span<const Var>(vecs));  // N x d
  const Var context = g.matmul(g.transpose(stacked), weights);

  std::vector<Var> inputs(vecs.begin(), vecs.end() - 1);
  inputs.push_back(context);
  const Var state = run_lstm(g, enc.sentence, std::span<const Var>(inputs));
  return {g.dropout(g.slice(state, 0, enc.sentence.hidden_dim), dropout), weights};
}

#define SPKCLS_INSTANTIATE_ENCODER(Real)                                          \
  template LstmParams<Real> add_lstm<Real>(ParamStore<Real>&, const std::string&, \
                                           std::size_t, std::size_t, Real,       \
                                           std::mt19937_64&);                    \
  template AttentionParams<Real> add_attention<Real>(                            \
      ParamStore<Real>&, const std::string&, std::size_t, Real, std::mt19937_64&); \
  template BoundEncoder bind<Real>(Graph<Real>&, const EncoderParams<Real>&);    \
  template BoundAttention bind<Real>(Graph<Real>&, const AttentionParams<Real>&); \
  template Var run_lstm<Real>(Graph<Real>&, const BoundLstm&, std::span<const Var>); \
  template Var encode_sentence<Real>(Graph<Real>&, const BoundEncoder&,          \
                                     std::span<const TokenId>, Real);            \
  template Var encode_block<Real>(Graph<Real>&, const BoundEncoder&,             \
                                  std::span<const SentenceIds>, Real);           \
  template AttentionResult static_attention<Real>(                               \
      Graph<Real>&, const BoundEncoder&, const BoundAttention&,                  \
      std::span<const SentenceIds>, Var, Real);

SPKCLS_INSTANTIATE_ENCODER(float)
SPKCLS_INSTANTIATE_ENCODER(double)

}  // namespace spkcls
