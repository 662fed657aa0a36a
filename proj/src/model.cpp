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
#include "spkcls/model.hpp"

#include <charconv>
#include <cstdio>
#include <random>
#include <utility>

#include "spkcls/errors.hpp"
#include "spkcls/hybrid.hpp"
#include "spkcls/speaker_models.hpp"

namespace spkcls {

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTemporal: return "temporal";
    case ModelKind::kContent: return "content";
    case ModelKind::kHybridAfter: return "hybrid-after";
    case ModelKind::kHybridWhile: return "hybrid-while";
    case ModelKind::kHybridAdaptive: return "hybrid-adaptive";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (ModelKind k : {ModelKind::kTemporal, ModelKind::kContent, ModelKind::kHybridAfter,
                      ModelKind::kHybridWhile, ModelKind::kHybridAdaptive}) {
    if (model_kind_name(k) == name) return k;
  }
  throw ContractError("unknown model kind: " + std::string(name));
}

bool has_temporal(ModelKind kind) { return kind != ModelKind::kContent; }
bool has_content(ModelKind kind) { return kind != ModelKind::kTemporal; }

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const char* key) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError(std::string("bad checkpoint meta value for ") + key + ": " + s);
  }
  return v;
}

std::size_t parse_size(const std::string& s, const char* key) {
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError(std::string("bad checkpoint meta value for ") + key + ": " + s);
  }
  return v;
}

const std::string& need(const std::map<std::string, std::string>& meta, const char* key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw FormatError(std::string("checkpoint meta missing ") + key);
  return it->second;
}

template <typename Real>
LstmParams<Real> lstm_at(ParamStore<Real>& store, const std::string& prefix, std::size_t d) {
  LstmParams<Real> p;
  p.weights = &store.get(prefix + "/W");
  p.bias = &store.get(prefix + "/b");
  p.input_dim = d;
  p.hidden_dim = d;
  return p;
}

template <typename Real>
EncoderParams<Real> encoder_at(ParamStore<Real>& store, const std::string& part,
                               const std::string& side, std::size_t d) {
  EncoderParams<Real> e;
  e.embeddings = &store.get(part + "/embeddings");
  e.word = lstm_at(store, part + "/" + side + "/word", d);
  e.sentence = lstm_at(store, part + "/" + side + "/sentence", d);
  e.dim = d;
  return e;
}

}  // namespace

template <typename Real>
SpeakerModel<Real>::SpeakerModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config) {
  if (config_.dim == 0 || config_.k_max == 0) {
    throw ContractError("model dim and k_max must be positive");
  }
  if (config_.vocab_size < 2) throw ContractError("vocabulary must hold at least pad and unk");
  if (config_.dropout < 0 || config_.dropout >= 1) {
    throw ContractError("dropout must be in [0, 1)");
  }
  if (config_.gate_g < 0 || config_.gate_g > 1) throw ContractError("gate g must be in [0, 1]");
  build(seed);
  wire();
}

template <typename Real>
SpeakerModel<Real>::SpeakerModel(const SpeakerModel& other)
    : config_(other.config_), params_(other.params_) {
  wire();
}

template <typename Real>
SpeakerModel<Real>& SpeakerModel<Real>::operator=(const SpeakerModel& other) {
  if (this != &other) {
    config_ = other.config_;
    params_ = other.params_;
    wire();
  }
  return *this;
}

template <typename Real>
void SpeakerModel<Real>::build(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t d = config_.dim;
  const Real bound = static_cast<Real>(config_.init_bound);
  if (has_temporal(config_.kind)) {
    if (config_.temporal_bias_only) {
      init_uniform(params_.add("temporal/bias", {config_.k_max, 1}), bound, rng);
    } else {
      init_uniform(params_.add("temporal/embeddings", {config_.vocab_size, d}), bound, rng);
      add_lstm(params_, "temporal/current/word", d, d, bound, rng);
      add_lstm(params_, "temporal/current/sentence", d, d, bound, rng);
      init_uniform(params_.add("temporal/table", {config_.k_max, d}), bound, rng);
    }
  }
  if (has_content(config_.kind)) {
    init_uniform(params_.add("content/embeddings", {config_.vocab_size, d}), bound, rng);
    add_lstm(params_, "content/current/word", d, d, bound, rng);
    add_lstm(params_, "content/current/sentence", d, d, bound, rng);
    if (!config_.tie_encoders) {
      add_lstm(params_, "content/speaker/word", d, d, bound, rng);
      add_lstm(params_, "content/speaker/sentence", d, d, bound, rng);
    }
    if (config_.static_attention) add_attention(params_, "content/attention", d, bound, rng);
  }
  if (config_.kind == ModelKind::kHybridWhile) {
    params_.add("gate/gamma", {1, 1});  // sigmoid(0) = 0.5
  } else if (config_.kind == ModelKind::kHybridAdaptive) {
    params_.add("gate/w", {1, 1}).value.values[0] = static_cast<Real>(config_.gate_w_init);
    params_.add("gate/b", {1, 1}).value.values[0] = static_cast<Real>(config_.gate_b_init);
  }
}

template <typename Real>
void SpeakerModel<Real>::wire() {
  const std::size_t d = config_.dim;
  temporal_.reset();
  content_.reset();
  gate_gamma_ = gate_w_ = gate_b_ = nullptr;
  if (has_temporal(config_.kind)) {
    TemporalPart t;
    if (config_.temporal_bias_only) {
      t.table = &params_.get("temporal/bias");
    } else {
      t.encoder = encoder_at(params_, "temporal", "current", d);
      t.table = &params_.get("temporal/table");
    }
    temporal_ = t;
  }
  if (has_content(config_.kind)) {
    ContentPart c;
    c.current = encoder_at(params_, "content", "current", d);
    c.speaker = config_.tie_encoders ? c.current : encoder_at(params_, "content", "speaker", d);
    if (config_.static_attention) {
      AttentionParams<Real> a;
      a.sentence_proj = &params_.get("content/attention/sentence_proj");
      a.speaker_proj = &params_.get("content/attention/speaker_proj");
      a.score = &params_.get("content/attention/score");
      c.attention = a;
    }
    content_ = c;
  }
  gate_gamma_ = params_.find("gate/gamma");
  gate_w_ = params_.find("gate/w");
  gate_b_ = params_.find("gate/b");
}

template <typename Real>
Var SpeakerModel<Real>::temporal_probs(Graph<Real>& g, const EncodedSample& s,
                                       Real dropout) const {
  const TemporalPart& t = *temporal_;
  Var table = g.param(*t.table);
  if (config_.temporal_bias_only) {
    std::vector<Var> logits;
    logits.reserve(s.k());
    for (const auto& c : s.candidates) {
      if (c.rank < 1 || static_cast<std::size_t>(c.rank) > config_.k_max) {
        throw ContractError("candidate rank out of range: " + std::to_string(c.rank));
      }
      logits.push_back(g.pick(table, static_cast<std::size_t>(c.rank - 1)));
    }
    return g.softmax(g.concat(logits));
  }
  BoundEncoder enc = bind(g, t.encoder);
  Var u = encode_block(g, enc, s.current, dropout);
  std::vector<Var> speakers;
  speakers.reserve(s.k());
  for (const auto& c : s.candidates) speakers.push_back(temporal_speaker_vector(g, table, c.rank));
  return score_candidates(g, u, speakers);
}

template <typename Real>
Var SpeakerModel<Real>::content_probs(Graph<Real>& g, const EncodedSample& s,
                                      Real dropout) const {
  const ContentPart& c = *content_;
  BoundEncoder current = bind(g, c.current);
  BoundEncoder speaker = config_.tie_encoders ? current : bind(g, c.speaker);
  std::vector<Var> speakers;
  speakers.reserve(s.k());
  for (const auto& cand : s.candidates) {
    speakers.push_back(content_speaker_vector(g, speaker, cand, dropout));
  }
  if (!c.attention) {
    Var u = encode_block(g, current, s.current, dropout);
    return score_candidates(g, u, speakers);
  }
  // One speaker-conditioned block vector per candidate.
  BoundAttention att = bind(g, *c.attention);
  std::vector<Var> logits;
  logits.reserve(s.k());
  for (Var sv : speakers) {
    AttentionResult r = static_attention(g, current, att, s.current, sv, dropout);
    logits.push_back(g.matmul(g.transpose(sv), r.output));
  }
  return g.softmax(g.concat(logits));
}

template <typename Real>
typename SpeakerModel<Real>::Forward SpeakerModel<Real>::forward(
    Graph<Real>& g, const EncodedSample& sample) const {
  if (sample.k() == 0) throw ContractError("sample has no candidates");
  if (sample.k() > config_.k_max) {
    throw ContractError("sample has more candidates than k_max");
  }
  const Real drop = g.training() ? static_cast<Real>(config_.dropout) : Real(0);
  Forward f;
  switch (config_.kind) {
    case ModelKind::kTemporal:
      f.temporal = temporal_probs(g, sample, drop);
      f.probs = *f.temporal;
      return f;
    case ModelKind::kContent:
      f.content = content_probs(g, sample, drop);
      f.probs = *f.content;
      return f;
    case ModelKind::kHybridAfter:
      f.gate = g.constant(Shape{1, 1}, {static_cast<Real>(config_.gate_g)});
      break;
    case ModelKind::kHybridWhile:
      f.gate = g.sigmoid(g.param(*gate_gamma_));
      break;
    case ModelKind::kHybridAdaptive:
      break;
  }
  f.temporal = temporal_probs(g, sample, drop);
  f.content = content_probs(g, sample, drop);
  if (config_.kind == ModelKind::kHybridAdaptive) {
    f.gate = self_adaptive_gate(g, *f.content, g.param(*gate_w_), g.param(*gate_b_));
  }
  f.probs = interpolate(g, *f.temporal, *f.content, *f.gate);
  return f;
}

template <typename Real>
Var SpeakerModel<Real>::loss(Graph<Real>& g,
                             std::span<const EncodedSample* const> batch) const {
  if (batch.empty()) throw ContractError("empty batch");
  std::vector<Var> terms;
  terms.reserve(batch.size());
  for (const EncodedSample* s : batch) {
    if (s->gold >= s->k()) throw ContractError("gold index out of range");
    terms.push_back(negative_log_likelihood(g, distribution(g, *s), s->gold));
  }
  return g.mean(g.concat(terms));
}

template <typename Real>
Var SpeakerModel<Real>::loss(Graph<Real>& g, std::span<const EncodedSample> batch) const {
  std::vector<const EncodedSample*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& s : batch) ptrs.push_back(&s);
  return loss(g, std::span<const EncodedSample* const>(ptrs));
}

namespace {

template <typename Real>
std::vector<double> widen(std::span<const Real> v) {
  return std::vector<double>(v.begin(), v.end());
}

}  // namespace

template <typename Real>
std::vector<double> SpeakerModel<Real>::predict_probs(const EncodedSample& sample) const {
  Graph<Real> g(GraphOptions{.check_finite = false, .training = false});
  return widen<Real>(g.value(distribution(g, sample)));
}

template <typename Real>
typename SpeakerModel<Real>::Components SpeakerModel<Real>::predict_components(
    const EncodedSample& sample) const {
  if (config_.kind == ModelKind::kTemporal || config_.kind == ModelKind::kContent) {
    throw ContractError("components are only defined for hybrid models");
  }
  Graph<Real> g(GraphOptions{.check_finite = false, .training = false});
  Forward f = forward(g, sample);
  Components c;
  c.temporal = widen<Real>(g.value(*f.temporal));
  c.content = widen<Real>(g.value(*f.content));
  c.hybrid = widen<Real>(g.value(f.probs));
  c.gate = static_cast<double>(g.scalar(*f.gate));
  return c;
}

template <typename Real>
void SpeakerModel<Real>::set_gate(double g) {
  if (!(g >= 0 && g <= 1)) throw ContractError("gate g must be in [0, 1]");
  config_.gate_g = g;
}

template <typename Real>
std::size_t SpeakerModel<Real>::load_matching(const ParamStore<Real>& other) {
  std::size_t copied = 0;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter<Real>& p = params_[i];
    const Parameter<Real>* src = other.find(p.name);
    if (src == nullptr || !(src->value.shape == p.value.shape)) continue;
    p.value.values = src->value.values;
    ++copied;
  }
  return copied;
}

template <typename Real>
Checkpoint SpeakerModel<Real>::to_checkpoint(std::map<std::string, std::string> meta) const {
  meta["model"] = std::string(model_kind_name(config_.kind));
  meta["dim"] = std::to_string(config_.dim);
  meta["vocab_size"] = std::to_string(config_.vocab_size);
  meta["k_max"] = std::to_string(config_.k_max);
  meta["tie_encoders"] = config_.tie_encoders ? "1" : "0";
  meta["temporal_bias_only"] = config_.temporal_bias_only ? "1" : "0";
  meta["static_attention"] = config_.static_attention ? "1" : "0";
  meta["dropout"] = fmt_double(config_.dropout);
  meta["init_bound"] = fmt_double(config_.init_bound);
  meta["gate_w_init"] = fmt_double(config_.gate_w_init);
  meta["gate_b_init"] = fmt_double(config_.gate_b_init);
  meta["gate_g"] = fmt_double(config_.gate_g);
  return make_checkpoint(params_, std::move(meta));
}

template <typename Real>
ModelConfig SpeakerModel<Real>::config_from_meta(
    const std::map<std::string, std::string>& meta) {
  ModelConfig c;
  try {
    c.kind = parse_model_kind(need(meta, "model"));
  } catch (const ContractError& e) {
    throw FormatError(e.what());
  }
  c.dim = parse_size(need(meta, "dim"), "dim");
  c.vocab_size = parse_size(need(meta, "vocab_size"), "vocab_size");
  c.k_max = parse_size(need(meta, "k_max"), "k_max");
  c.tie_encoders = need(meta, "tie_encoders") == "1";
  c.temporal_bias_only = need(meta, "temporal_bias_only") == "1";
  c.static_attention = need(meta, "static_attention") == "1";
  c.dropout = parse_double(need(meta, "dropout"), "dropout");
  c.init_bound = parse_double(need(meta, "init_bound"), "init_bound");
  c.gate_w_init = parse_double(need(meta, "gate_w_init"), "gate_w_init");
  c.gate_b_init = parse_double(need(meta, "gate_b_init"), "gate_b_init");
  c.gate_g = parse_double(need(meta, "gate_g"), "gate_g");
  return c;
}

template <typename Real>
SpeakerModel<Real> SpeakerModel<Real>::from_checkpoint(const Checkpoint& ckpt) {
  ModelConfig c = config_from_meta(ckpt.meta);
  SpeakerModel model(c, 0);
  if (ckpt.tensors.size() != model.params_.size()) {
    throw FormatError("checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                      " tensors, model expects " + std::to_string(model.params_.size()));
  }
  load_into(ckpt, model.params_);
  return model;
}

template class SpeakerModel<float>;
template class SpeakerModel<double>;

}  // namespace spkcls
