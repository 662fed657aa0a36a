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
#include "spkcls/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <utility>

#include "spkcls/errors.hpp"
#include "spkcls/speaker_models.hpp"

namespace spkcls {

template <typename Real>
double mean_loss(const SpeakerModel<Real>& model, std::span<const EncodedSample> samples) {
  if (samples.empty()) throw ContractError("mean_loss of an empty set");
  double total = 0;
  for (const auto& s : samples) {
    Graph<Real> g(GraphOptions{.check_finite = false, .training = false});
    std::vector<const EncodedSample*> one{&s};
    total += static_cast<double>(g.scalar(model.loss(g, one)));
  }
  return total / static_cast<double>(samples.size());
}

template <typename Real>
std::vector<PredictionRecord> predict_all(const SpeakerModel<Real>& model,
                                          std::span<const EncodedSample> samples) {
  std::vector<PredictionRecord> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    PredictionRecord r;
    r.gold = s.gold;
    r.probs = model.predict_probs(s);
    r.predicted = predict(r.probs);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

template <typename Real>
void record_best(TrainResult<Real>& result, const ParamStore<Real>& params,
                 const EpochLog& row) {
  for (Metric m : kAllMetrics) {
    double v = row.validation.get(m);
    auto it = result.best_value.find(m);
    if (it == result.best_value.end() || v > it->second) {
      result.best_value[m] = v;
      result.best_epoch[m] = row.epoch;
      result.best_params.insert_or_assign(m, params);
    }
  }
}

}  // namespace

template <typename Real>
TrainResult<Real> train(SpeakerModel<Real>& model, std::span<const EncodedSample> train_set,
                        std::span<const EncodedSample> validation, const TrainConfig& config,
                        const std::string& run_name) {
  if (train_set.empty() || validation.empty()) {
    throw ContractError("training and validation sets must be non-empty");
  }
  if (config.batch_size == 0) throw ContractError("batch size must be positive");

  TrainResult<Real> result;
  ParamStore<Real>& params = model.params();
  Adam<Real> adam(config.adam);
  std::mt19937_64 rng(config.seed);

  auto log_epoch = [&](EpochLog row) {
    if (row.epoch > 0) record_best(result, params, row);
    if (config.on_epoch) config.on_epoch(run_name, row);
    result.log.push_back(std::move(row));
  };

  result.initial_loss = mean_loss(model, train_set);
  log_epoch(EpochLog{0, result.initial_loss, evaluate(predict_all(model, validation))});

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const EncodedSample*> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train_set[order[i]]);

      params.zero_grad();
      Graph<Real> g(GraphOptions{
          .check_finite = config.check_finite, .training = true, .seed = rng()});
      Var loss = model.loss(g, batch);
      const double value = static_cast<double>(g.scalar(loss));
      if (!std::isfinite(value)) {
        throw NumericError(run_name + ": non-finite loss in epoch " + std::to_string(epoch));
      }
      g.backward(loss);
      for (std::size_t p = 0; p < params.size(); ++p) {
        if (!all_finite<Real>(params[p].grad)) {
          throw NumericError(run_name + ": non-finite gradient for " + params[p].name +
                             " in epoch " + std::to_string(epoch));
        }
      }
      adam.step(params);
      loss_sum += value * static_cast<double>(batch.size());
    }
    params.zero_grad();
    result.epochs_run = epoch;

    const std::size_t best_before = result.best_epoch[config.selection];
    log_epoch(EpochLog{epoch, loss_sum / static_cast<double>(order.size()),
                       evaluate(predict_all(model, validation))});
    if (result.best_epoch[config.selection] != best_before || epoch == 1) {
      since_best = 0;
    } else if (++since_best >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  if (result.best_params.empty()) {
    // max_epochs == 0: the untrained model is all there is.
    record_best(result, params, result.log.front());
  }
  params.copy_values_from(result.best_params.at(config.selection));
  return result;
}

template <typename Real>
std::vector<SweepInput> sweep_inputs(const SpeakerModel<Real>& temporal,
                                     const SpeakerModel<Real>& content,
                                     std::span<const EncodedSample> samples) {
  std::vector<SweepInput> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(SweepInput{s.gold, temporal.predict_probs(s), content.predict_probs(s)});
  }
  return out;
}

template <typename Real>
FitResult<Real> fit(const ModelConfig& config, std::span<const EncodedSample> train_set,
                    std::span<const EncodedSample> validation, const TrainConfig& tconfig,
                    const WarmStart<Real>& warm) {
  if (config.kind != ModelKind::kHybridAfter) {
    FitResult<Real> r{SpeakerModel<Real>(config, tconfig.seed), {}, std::nullopt, 0};
    for (const ParamStore<Real>* w : warm) r.model.load_matching(*w);
    auto tr = train(r.model, train_set, validation, tconfig,
                    std::string(model_kind_name(config.kind)));
    r.validation_score = tr.best_value.at(tconfig.selection);
    r.runs.emplace_back(std::string(model_kind_name(config.kind)), std::move(tr));
    return r;
  }

  ModelConfig tc = config;
  tc.kind = ModelKind::kTemporal;
  ModelConfig cc = config;
  cc.kind = ModelKind::kContent;
  SpeakerModel<Real> temporal(tc, tconfig.seed);
  SpeakerModel<Real> content(cc, tconfig.seed + 1);
  for (const ParamStore<Real>* w : warm) {
    temporal.load_matching(*w);
    content.load_matching(*w);
  }
  TrainConfig t2 = tconfig;
  auto tr = train(temporal, train_set, validation, t2, "temporal");
  t2.seed = tconfig.seed + 1;
  auto cr = train(content, train_set, validation, t2, "content");

  GateSweep sweep = sweep_gate(sweep_inputs(temporal, content, validation), tconfig.g_grid);
  const double best_g = sweep.best_g.at(tconfig.selection);

  SpeakerModel<Real> hybrid(config, tconfig.seed);
  hybrid.load_matching(temporal.params());
  hybrid.load_matching(content.params());
  hybrid.set_gate(best_g);

  double score = 0;
  for (const auto& row : sweep.rows) {
    if (row.g == best_g) score = row.report.get(tconfig.selection);
  }
  FitResult<Real> r{std::move(hybrid), {}, std::move(sweep), score};
  r.runs.emplace_back("temporal", std::move(tr));
  r.runs.emplace_back("content", std::move(cr));
  return r;
}

template <typename Real>
FitResult<Real> fit_dropout_search(ModelConfig config,
                                   std::span<const EncodedSample> train_set,
                                   std::span<const EncodedSample> validation,
                                   const TrainConfig& tconfig,
                                   std::span<const double> rates,
                                   const WarmStart<Real>& warm) {
  if (rates.empty()) throw ContractError("empty dropout grid");
  std::optional<FitResult<Real>> best;
  for (double rate : rates) {
    config.dropout = rate;
    FitResult<Real> r = fit<Real>(config, train_set, validation, tconfig, warm);
    if (!best || r.validation_score > best->validation_score) best = std::move(r);
  }
  return std::move(*best);
}

void write_training_log_header(std::ostream& out) {
  out << "run\tepoch\ttrain_loss";
  for (Metric m : kAllMetrics) out << '\t' << metric_name(m);
  out << '\n';
}

void write_training_log_row(std::ostream& out, const std::string& run, const EpochLog& row) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", row.train_loss);
  out << run << '\t' << row.epoch << '\t' << buf;
  for (Metric m : kAllMetrics) {
    std::snprintf(buf, sizeof(buf), "%.6f", row.validation.get(m));
    out << '\t' << buf;
  }
  out << '\n';
}

#define SPKCLS_INSTANTIATE_TRAINER(Real)                                                  \
  template double mean_loss<Real>(const SpeakerModel<Real>&,                              \
                                  std::span<const EncodedSample>);                        \
  template std::vector<PredictionRecord> predict_all<Real>(const SpeakerModel<Real>&,     \
                                                           std::span<const EncodedSample>); \
  template TrainResult<Real> train<Real>(SpeakerModel<Real>&, std::span<const EncodedSample>, \
                                         std::span<const EncodedSample>,                  \
                                         const TrainConfig&, const std::string&);         \
  template FitResult<Real> fit<Real>(const ModelConfig&, std::span<const EncodedSample>,  \
                                     std::span<const EncodedSample>, const TrainConfig&,     \
                                     const WarmStart<Real>&);                             \
  template FitResult<Real> fit_dropout_search<Real>(                                      \
      ModelConfig, std::span<const EncodedSample>, std::span<const EncodedSample>,        \
      const TrainConfig&, std::span<const double>, const WarmStart<Real>&);               \
  template std::vector<SweepInput> sweep_inputs<Real>(                                    \
      const SpeakerModel<Real>&, const SpeakerModel<Real>&, std::span<const EncodedSample>);

SPKCLS_INSTANTIATE_TRAINER(float)
SPKCLS_INSTANTIATE_TRAINER(double)

}  // namespace spkcls
