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
#ifndef SPKCLS_MODEL_HPP_
#define SPKCLS_MODEL_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spkcls/encoder.hpp"
#include "spkcls/graph.hpp"
#include "spkcls/params.hpp"
#include "spkcls/vocab.hpp"

namespace spkcls {

enum class ModelKind { kTemporal, kContent, kHybridAfter, kHybridWhile, kHybridAdaptive };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
bool has_temporal(ModelKind kind);
bool has_content(ModelKind kind);

struct ModelConfig {
  ModelKind kind = ModelKind::kContent;
  std::size_t dim = 100;
  std::size_t vocab_size = 2;
  std::size_t k_max = 5;
  // Speaker-side encoder reuses the current-block LSTMs.
  bool tie_encoders = false;
  // Temporal logits are a learned per-rank bias instead of s_rank . u.
  bool temporal_bias_only = false;
  bool static_attention = false;
  double dropout = 0.0;
  double init_bound = 0.08;
  double gate_w_init = 5.0;
  double gate_b_init = -1.0;
  // Fixed gate of the interpolate-after-training model.
  double gate_g = 0.5;
};

// Parameter names: every temporal parameter lives under "temporal/", every
// content parameter under "content/", gate parameters under "gate/". A hybrid
// therefore shares names with its two sub-models, which is how trained
// sub-models are assembled into one (see load_matching).
template <typename Real>
class SpeakerModel {
 public:
  SpeakerModel(const ModelConfig& config, std::uint64_t seed);
  SpeakerModel(const SpeakerModel& other);
  SpeakerModel& operator=(const SpeakerModel& other);
  SpeakerModel(SpeakerModel&&) noexcept = default;
  SpeakerModel& operator=(SpeakerModel&&) noexcept = default;

  struct Forward {
    Var probs;
    std::optional<Var> temporal;
    std::optional<Var> content;
    std::optional<Var> gate;
  };

  // Candidate distribution (k x 1) for one sample. Dropout is active only
  // when the graph is in training mode.
  Forward forward(Graph<Real>& g, const EncodedSample& sample) const;
  Var distribution(Graph<Real>& g, const EncodedSample& sample) const {
    return forward(g, sample).probs;
  }

  // Mean over the batch of -log max(p[gold], 1e-12).
  Var loss(Graph<Real>& g, std::span<const EncodedSample* const> batch) const;
  Var loss(Graph<Real>& g, std::span<const EncodedSample> batch) const;

  std::vector<double> predict_probs(const EncodedSample& sample) const;

  struct Components {
    std::vector<double> temporal;
    std::vector<double> content;
    std::vector<double> hybrid;
    double gate = 0;
  };
  // Only for hybrid kinds.
  Components predict_components(const EncodedSample& sample) const;

  ParamStore<Real>& params() { return params_; }
  const ParamStore<Real>& params() const { return params_; }
  const ModelConfig& config() const { return config_; }

  void set_gate(double g);
  // Copies values of every same-named, same-shaped parameter of `other`;
  // returns how many were copied.
  std::size_t load_matching(const ParamStore<Real>& other);

  Checkpoint to_checkpoint(std::map<std::string, std::string> extra_meta = {}) const;
  static SpeakerModel from_checkpoint(const Checkpoint& ckpt);
  static ModelConfig config_from_meta(const std::map<std::string, std::string>& meta);

 private:
  struct TemporalPart {
    EncoderParams<Real> encoder;
    Parameter<Real>* table = nullptr;
  };
  struct ContentPart {
    EncoderParams<Real> current;
    EncoderParams<Real> speaker;
    std::optional<AttentionParams<Real>> attention;
  };

  void build(std::uint64_t seed);
  void wire();
  Var temporal_probs(Graph<Real>& g, const EncodedSample& s, Real dropout) const;
  Var content_probs(Graph<Real>& g, const EncodedSample& s, Real dropout) const;

  ModelConfig config_;
  ParamStore<Real> params_;
  std::optional<TemporalPart> temporal_;
  std::optional<ContentPart> content_;
  Parameter<Real>* gate_gamma_ = nullptr;
  Parameter<Real>* gate_w_ = nullptr;
  Parameter<Real>* gate_b_ = nullptr;
};

}  // namespace spkcls

#endif  // SPKCLS_MODEL_HPP_
