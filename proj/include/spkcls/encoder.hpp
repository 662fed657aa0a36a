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
#ifndef SPKCLS_ENCODER_HPP_
#define SPKCLS_ENCODER_HPP_

// Hierarchical recurrent block encoder: a word-level LSTM reads each sentence
// left to right from a zero state, and a sentence-level LSTM reads the
// sentence vectors in order. The last hidden state of the sentence-level
// network is the block vector.

#include <random>
#include <span>
#include <string>

#include "spkcls/graph.hpp"
#include "spkcls/params.hpp"
#include "spkcls/vocab.hpp"

namespace spkcls {

template <typename Real>
struct LstmParams {
  Parameter<Real>* weights = nullptr;  // 4d x (input + d), gates i, f, o, g
  Parameter<Real>* bias = nullptr;     // 4d x 1
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
};

// Weights uniform in [-init_bound, init_bound]; bias zero except the forget
// gate block, which starts at 1.
template <typename Real>
LstmParams<Real> add_lstm(ParamStore<Real>& store, const std::string& prefix,
                          std::size_t input_dim, std::size_t hidden_dim,
                          Real init_bound, std::mt19937_64& rng);

template <typename Real>
struct EncoderParams {
  Parameter<Real>* embeddings = nullptr;  // |V| x d
  LstmParams<Real> word;
  LstmParams<Real> sentence;
  std::size_t dim = 0;
};

// Additive attention of the sentence vectors against a speaker vector:
//   e_j = score^T tanh(sentence_proj v_j + speaker_proj s)
template <typename Real>
struct AttentionParams {
  Parameter<Real>* sentence_proj = nullptr;  // d x d
  Parameter<Real>* speaker_proj = nullptr;   // d x d
  Parameter<Real>* score = nullptr;          // d x 1
};

template <typename Real>
AttentionParams<Real> add_attention(ParamStore<Real>& store, const std::string& prefix,
                                    std::size_t dim, Real init_bound,
                                    std::mt19937_64& rng);

// Parameter nodes bound to one graph.
struct BoundLstm {
  Var weights;
  Var bias;
  std::size_t hidden_dim = 0;
};

struct BoundEncoder {
  Var embeddings;
  BoundLstm word;
  BoundLstm sentence;
  std::size_t dim = 0;
};

struct BoundAttention {
  Var sentence_proj;
  Var speaker_proj;
  Var score;
};

template <typename Real>
BoundEncoder bind(Graph<Real>& g, const EncoderParams<Real>& p);
template <typename Real>
BoundAttention bind(Graph<Real>& g, const AttentionParams<Real>& p);

// Runs the cell over `inputs` from a zero state; returns the final [h; c].
template <typename Real>
Var run_lstm(Graph<Real>& g, const BoundLstm& cell, std::span<const Var> inputs);

// Final hidden state after reading the tokens. Throws ContractError on an
// empty sentence. `dropout` applies to the word embeddings.
template <typename Real>
Var encode_sentence(Graph<Real>& g, const BoundEncoder& enc,
                    std::span<const TokenId> tokens, Real dropout = 0);

// Block vector (d x 1). Throws ContractError on an empty block. `dropout`
// applies to the word embeddings and to the returned block vector.
template <typename Real>
Var encode_block(Graph<Real>& g, const BoundEncoder& enc,
                 std::span<const SentenceIds> sentences, Real dropout = 0);

struct AttentionResult {
  Var output;   // block vector (d x 1)
  Var weights;  // N x 1, sums to 1
};

// Speaker-conditioned block vector. The sentence-level network reads
// sentences 1..N-1 as usual and its final step reads the attention-weighted
// sum of all N sentence vectors instead of sentence N, so a one-sentence
// block reduces exactly to encode_block.
template <typename Real>
AttentionResult static_attention(Graph<Real>& g, const BoundEncoder& enc,
                                 const BoundAttention& att,
                                 std::span<const SentenceIds> sentences,
                                 Var speaker_vector, Real dropout = 0);

}  // namespace spkcls

#endif  // SPKCLS_ENCODER_HPP_
