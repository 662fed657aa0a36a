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
#include "spkcls/speaker_models.hpp"

#include <cmath>
#include <string>

#include "spkcls/errors.hpp"

namespace spkcls {

template <typename Real>
Var content_speaker_vector(Graph<Real>& g, const BoundEncoder& speaker_encoder,
                           const EncodedCandidate& candidate, Real dropout) {
  return encode_block(g, speaker_encoder, std::span(candidate.history), dropout);
}

template <typename Real>
Var temporal_speaker_vector(Graph<Real>& g, Var table, int rank) {
  const Shape s = g.shape(table);
  if (rank < 1 || static_cast<std::size_t>(rank) > s.rows) {
    throw ContractError("temporal_speaker_vector: rank " + std::to_string(rank) +
                        " outside [1, " + std::to_string(s.rows) + "]");
  }
  return g.row(table, static_cast<std::size_t>(rank - 1));
}

template <typename Real>
Var candidate_logits(Graph<Real>& g, Var u, std::span<const Var> speaker_vectors) {
  if (speaker_vectors.empty()) throw ContractError("score_candidates: no candidates");
  const Shape su = g.shape(u);
  for (Var s : speaker_vectors) {
    if (g.shape(s) != su) {
      throw DimensionError("score_candidates: speaker vector " + g.shape(s).to_string() +
                           " does not match u " + su.to_string());
    }
  }
  return g.matmul(g.stack(speaker_vectors), u);
}

template <typename Real>
Var score_candidates(Graph<Real>& g, Var u, std::span<const Var> speaker_vectors) {
  return g.softmax(candidate_logits(g, u, speaker_vectors));
}

std::size_t predict(std::span<const double> probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

void validate_distribution(std::span<const double> probs, double tolerance,
                           bool strictly_positive) {
  if (probs.empty()) throw ContractError("distribution is empty");
  double total = 0;
  for (double p : probs) {
    if (!std::isfinite(p)) throw NumericError("non-finite distribution entry");
    const bool low_ok = strictly_positive ? p > 0.0 : p >= 0.0;
    if (!low_ok || !(p <= 1.0)) {
      throw ContractError("distribution entry " + std::to_string(p) + " outside (0, 1]");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > tolerance) {
    throw ContractError("distribution sums to " + std::to_string(total));
  }
}

#define SPKCLS_INSTANTIATE_SPEAKER(Real)                                           \
  template Var content_speaker_vector<Real>(Graph<Real>&, const BoundEncoder&,     \
                                            const EncodedCandidate&, Real);       \
  template Var temporal_speaker_vector<Real>(Graph<Real>&, Var, int);             \
  template Var candidate_logits<Real>(Graph<Real>&, Var, std::span<const Var>);   \
  template Var score_candidates<Real>(Graph<Real>&, Var, std::span<const Var>);

SPKCLS_INSTANTIATE_SPEAKER(float)
SPKCLS_INSTANTIATE_SPEAKER(double)

}  // namespace spkcls
