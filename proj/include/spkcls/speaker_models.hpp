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
#ifndef SPKCLS_SPEAKER_MODELS_HPP_
#define SPKCLS_SPEAKER_MODELS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "spkcls/encoder.hpp"
#include "spkcls/graph.hpp"
#include "spkcls/vocab.hpp"

namespace spkcls {

// Speaker vector from what the candidate has said: the speaker-side encoder
// applied to the history, oldest utterance first.
template <typename Real>
Var content_speaker_vector(Graph<Real>& g, const BoundEncoder& speaker_encoder,
                           const EncodedCandidate& candidate, Real dropout = 0);

// Row rank-1 of the k_max x d recency table. Throws ContractError unless
// 1 <= rank <= rows(table).
template <typename Real>
Var temporal_speaker_vector(Graph<Real>& g, Var table, int rank);

// logits[i] = s_i . u, as a k x 1 node.
template <typename Real>
Var candidate_logits(Graph<Real>& g, Var u, std::span<const Var> speaker_vectors);

// Softmax over candidate_logits. Throws DimensionError if any s_i does not
// match u.
template <typename Real>
Var score_candidates(Graph<Real>& g, Var u, std::span<const Var> speaker_vectors);

// Argmax; ties go to the lowest index, i.e. the most recent speaker.
std::size_t predict(std::span<const double> probs);

// Throws NumericError on a non-finite entry, ContractError unless every
// entry is in (0, 1] ([0, 1] when strictly_positive is false) and the sum is
// within tolerance of 1.
void validate_distribution(std::span<const double> probs, double tolerance = 1e-9,
                           bool strictly_positive = true);

}  // namespace spkcls

#endif  // SPKCLS_SPEAKER_MODELS_HPP_
