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
#ifndef SPKCLS_TRAINER_HPP_
#define SPKCLS_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spkcls/adam.hpp"
#include "spkcls/hybrid.hpp"
#include "spkcls/metrics.hpp"
#include "spkcls/model.hpp"

namespace spkcls {

struct EpochLog {
  std::size_t epoch = 0;  // 0 is the untrained model
  double train_loss = 0;  // epoch 0: mean NLL over the training set, no dropout
  MetricsReport validation;
};

struct TrainConfig {
  std::size_t batch_size = 10;
  std::size_t patience = 3;
  std::size_t max_epochs = 30;
  std::uint64_t seed = 0;
  Metric selection = Metric::kMacroF1;
  AdamConfig adam;
  bool check_finite = false;
  std::vector<double> g_grid = spkcls::g_grid(0.05);
  std::function<void(const std::string& run, const EpochLog&)> on_epoch;
};

template <typename Real>
struct TrainResult {
  std::vector<EpochLog> log;
  double initial_loss = 0;
  // Best validation snapshot per metric over epochs >= 1; an earlier epoch
  // wins ties.
  std::map<Metric, ParamStore<Real>> best_params;
  std::map<Metric, double> best_value;
  std::map<Metric, std::size_t> best_epoch;
  std::size_t epochs_run = 0;
  bool early_stopped = false;
};

// Mean NLL over `samples`, evaluation mode.
template <typename Real>
double mean_loss(const SpeakerModel<Real>& model, std::span<const EncodedSample> samples);

template <typename Real>
std::vector<PredictionRecord> predict_all(const SpeakerModel<Real>& model,
                                          std::span<const EncodedSample> samples);

// Adam on shuffled mini-batches with early stopping on the selection metric.
// On return the model holds the best parameters for that metric. Throws
// NumericError on a non-finite loss or gradient.
template <typename Real>
TrainResult<Real> train(SpeakerModel<Real>& model, std::span<const EncodedSample> train_set,
                        std::span<const EncodedSample> validation, const TrainConfig& config,
                        const std::string& run_name = "model");

template <typename Real>
struct FitResult {
  SpeakerModel<Real> model;
  std::vector<std::pair<std::string, TrainResult<Real>>> runs;
  std::optional<GateSweep> sweep;  // interpolate-after-training only
  double validation_score = 0;     // selection metric of `model`
};

template <typename Real>
using WarmStart = std::vector<const ParamStore<Real>*>;

// Trains any model kind. The interpolate-after-training hybrid trains its
// temporal and content models independently, then picks g on validation.
// Same-named parameters of every `warm` store are copied in before training.
template <typename Real>
FitResult<Real> fit(const ModelConfig& config, std::span<const EncodedSample> train_set,
                    std::span<const EncodedSample> validation, const TrainConfig& tconfig,
                    const WarmStart<Real>& warm = {});

// Repeats fit for each dropout rate and keeps the best by the selection
// metric; the lower rate wins ties.
template <typename Real>
FitResult<Real> fit_dropout_search(ModelConfig config,
                                   std::span<const EncodedSample> train_set,
                                   std::span<const EncodedSample> validation,
                                   const TrainConfig& tconfig,
                                   std::span<const double> rates,
                                   const WarmStart<Real>& warm = {});

template <typename Real>
std::vector<SweepInput> sweep_inputs(const SpeakerModel<Real>& temporal,
                                     const SpeakerModel<Real>& content,
                                     std::span<const EncodedSample> samples);

void write_training_log_header(std::ostream& out);
void write_training_log_row(std::ostream& out, const std::string& run, const EpochLog& row);

}  // namespace spkcls

#endif  // SPKCLS_TRAINER_HPP_
