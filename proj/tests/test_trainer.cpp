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
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "spkcls/errors.hpp"
#include "spkcls/model.hpp"
#include "spkcls/synth.hpp"
#include "spkcls/trainer.hpp"

namespace spkcls {
namespace {

struct Data {
  std::size_t vocab = 0;
  std::vector<EncodedSample> train, validation;
};

Data synth_data(SynthKind kind, int episodes, std::uint64_t seed) {
  auto corpus = gen_synthetic(default_synth_config(kind, episodes, seed));
  auto split = split_by_episode(build_samples(corpus.utterances), {}, seed);
  Vocabulary vocab = Vocabulary::build(split.train, 1);
  return {vocab.size(), encode_all(split.train, vocab), encode_all(split.validation, vocab)};
}

ModelConfig small(ModelKind kind, std::size_t vocab) {
  ModelConfig c;
  c.kind = kind;
  c.dim = 8;
  c.vocab_size = vocab;
  return c;
}

const Data& temporal_data() {
  static const Data d = synth_data(SynthKind::kTemporal, 20, 4);
  return d;
}

double mean_log_k(std::span<const EncodedSample> samples) {
  double total = 0;
  for (const auto& s : samples) total += std::log(static_cast<double>(s.k()));
  return total / static_cast<double>(samples.size());
}

TEST_CASE("initial loss is the uniform-guess loss") {
  const Data& d = temporal_data();
  SpeakerModel<double> m(small(ModelKind::kTemporal, d.vocab), 1);
  auto& table = m.params().get("temporal/table").value.values;
  std::fill(table.begin(), table.end(), 0.0);
  CHECK(std::abs(mean_loss(m, std::span<const EncodedSample>(d.train)) - mean_log_k(d.train)) <
        1e-12);

  // Small init keeps every kind close to uniform.
  for (ModelKind kind : {ModelKind::kContent, ModelKind::kHybridWhile}) {
    SpeakerModel<double> fresh(small(kind, d.vocab), 2);
    CHECK(std::abs(mean_loss(fresh, std::span<const EncodedSample>(d.train)) -
                   mean_log_k(d.train)) < 1e-2);
  }
}

TEST_CASE("training is deterministic and lowers the loss") {
  const Data& d = temporal_data();
  TrainConfig tc;
  tc.max_epochs = 3;
  tc.seed = 9;
  auto run = [&] {
    SpeakerModel<double> m(small(ModelKind::kTemporal, d.vocab), 5);
    auto r = train(m, std::span<const EncodedSample>(d.train),
                   std::span<const EncodedSample>(d.validation), tc);
    return std::make_pair(std::move(m), std::move(r));
  };
  auto [m1, r1] = run();
  auto [m2, r2] = run();
  REQUIRE(r1.log.size() == r2.log.size());
  for (std::size_t i = 0; i < r1.log.size(); ++i) CHECK(r1.log[i].train_loss == r2.log[i].train_loss);
  for (std::size_t i = 0; i < m1.params().size(); ++i) {
    CHECK(m1.params()[i].value.values == m2.params()[i].value.values);
  }
  REQUIRE(r1.log.size() >= 2);
  CHECK(r1.log[0].epoch == 0);
  CHECK(r1.log[0].train_loss == r1.initial_loss);
  CHECK(r1.log[1].train_loss < r1.initial_loss);
  for (Metric m : kAllMetrics) CHECK(r1.best_epoch.at(m) >= 1);

  // The learned table favours the most recent other speaker (rank 2; rank 1
  // is never gold) for most validation samples.
  std::size_t rank2 = 0;
  for (const auto& rec : predict_all(m1, std::span<const EncodedSample>(d.validation))) {
    rank2 += rec.predicted == 1;
  }
  CHECK(2 * rank2 > d.validation.size());
}

TEST_CASE("early stopping respects patience") {
  const Data& d = temporal_data();
  for (std::size_t patience : {1, 2}) {
    TrainConfig tc;
    tc.patience = patience;
    tc.max_epochs = 12;
    tc.seed = 3;
    std::vector<std::size_t> seen;
    tc.on_epoch = [&](const std::string& run, const EpochLog& row) {
      CHECK(run == "model");
      seen.push_back(row.epoch);
    };
    SpeakerModel<double> m(small(ModelKind::kTemporal, d.vocab), 1);
    auto r = train(m, std::span<const EncodedSample>(d.train),
                   std::span<const EncodedSample>(d.validation), tc);
    CHECK(seen.size() == r.log.size());
    const std::size_t best = r.best_epoch.at(Metric::kMacroF1);
    if (r.early_stopped) {
      CHECK(r.epochs_run == best + patience);
    } else {
      CHECK(r.epochs_run == tc.max_epochs);
    }
    // Best value is the maximum of the logged validation scores.
    double top = 0;
    for (std::size_t i = 1; i < r.log.size(); ++i) top = std::max(top, r.log[i].validation.macro_f1);
    CHECK(r.best_value.at(Metric::kMacroF1) == top);
    // The returned model is the best snapshot.
    auto recs = predict_all(m, std::span<const EncodedSample>(d.validation));
    CHECK(evaluate(recs).macro_f1 == top);
  }
}

TEST_CASE("non-finite values abort training") {
  const Data& d = temporal_data();
  SpeakerModel<double> m(small(ModelKind::kTemporal, d.vocab), 1);
  m.params().get("temporal/table").value.values[0] = std::numeric_limits<double>::quiet_NaN();
  TrainConfig tc;
  tc.max_epochs = 1;
  CHECK_THROWS_AS(train(m, std::span<const EncodedSample>(d.train),
                        std::span<const EncodedSample>(d.validation), tc),
                  NumericError);
  tc.check_finite = true;
  CHECK_THROWS_AS(train(m, std::span<const EncodedSample>(d.train),
                        std::span<const EncodedSample>(d.validation), tc),
                  NumericError);
}

TEST_CASE("model checkpoints round-trip") {
  std::mt19937_64 rng(2);
  auto sample = testing::random_sample(rng, 30, 4);
  for (ModelKind kind : {ModelKind::kTemporal, ModelKind::kContent, ModelKind::kHybridAfter,
                         ModelKind::kHybridWhile, ModelKind::kHybridAdaptive}) {
    ModelConfig c = small(kind, 30);
    c.static_attention = kind == ModelKind::kContent;
    c.gate_g = 0.35;
    SpeakerModel<double> m(c, 4);
    std::stringstream io;
    write_checkpoint(io, m.to_checkpoint({{"note", "x"}}));
    Checkpoint ck = read_checkpoint(io);
    CHECK(ck.meta.at("note") == "x");
    auto back = SpeakerModel<double>::from_checkpoint(ck);
    CHECK(back.config().kind == kind);
    CHECK(back.config().static_attention == c.static_attention);
    CHECK(back.predict_probs(sample) == m.predict_probs(sample));

    SpeakerModel<float> mf(c, 4);
    std::stringstream iof;
    write_checkpoint(iof, mf.to_checkpoint());
    auto backf = SpeakerModel<float>::from_checkpoint(read_checkpoint(iof));
    CHECK(backf.predict_probs(sample) == mf.predict_probs(sample));
  }
  Checkpoint bad = SpeakerModel<double>(small(ModelKind::kTemporal, 30), 1).to_checkpoint();
  bad.meta["model"] = "nope";
  CHECK_THROWS(SpeakerModel<double>::from_checkpoint(bad));
  bad = SpeakerModel<double>(small(ModelKind::kTemporal, 30), 1).to_checkpoint();
  bad.tensors.pop_back();
  CHECK_THROWS_AS(SpeakerModel<double>::from_checkpoint(bad), FormatError);
}

TEST_CASE("hybrids assemble from trained sub-models") {
  std::mt19937_64 rng(6);
  auto sample = testing::random_sample(rng, 30, 3);
  SpeakerModel<double> t(small(ModelKind::kTemporal, 30), 1);
  SpeakerModel<double> c(small(ModelKind::kContent, 30), 2);
  SpeakerModel<double> h(small(ModelKind::kHybridAfter, 30), 3);
  CHECK(h.load_matching(t.params()) == t.params().size());
  CHECK(h.load_matching(c.params()) == c.params().size());
  h.set_gate(0.3);
  auto parts = h.predict_components(sample);
  auto pt = t.predict_probs(sample);
  auto pc = c.predict_probs(sample);
  CHECK(parts.gate == 0.3);
  for (std::size_t i = 0; i < pt.size(); ++i) {
    CHECK(std::abs(parts.temporal[i] - pt[i]) < 1e-15);
    CHECK(std::abs(parts.content[i] - pc[i]) < 1e-15);
    CHECK(std::abs(parts.hybrid[i] - (0.7 * pt[i] + 0.3 * pc[i])) < 1e-15);
  }
  CHECK_THROWS_AS(t.predict_components(sample), ContractError);
}

TEST_CASE("fit of the interpolate-after-training hybrid") {
  const Data& d = temporal_data();
  TrainConfig tc;
  tc.max_epochs = 2;
  tc.seed = 1;
  tc.g_grid = g_grid(0.25);
  auto fr = fit<double>(small(ModelKind::kHybridAfter, d.vocab),
                        std::span<const EncodedSample>(d.train),
                        std::span<const EncodedSample>(d.validation), tc);
  REQUIRE(fr.runs.size() == 2);
  CHECK(fr.runs[0].first == "temporal");
  CHECK(fr.runs[1].first == "content");
  REQUIRE(fr.sweep.has_value());
  CHECK(fr.sweep->rows.size() == 5);
  const double g = fr.sweep->best_g.at(Metric::kMacroF1);
  CHECK(fr.model.config().gate_g == g);
  auto recs = predict_all(fr.model, std::span<const EncodedSample>(d.validation));
  CHECK(std::abs(evaluate(recs).macro_f1 - fr.validation_score) < 1e-12);
  for (const auto& row : fr.sweep->rows) {
    CHECK(row.report.macro_f1 <= fr.validation_score + 1e-12);
  }
}

TEST_CASE("dropout search and warm start") {
  const Data& d = temporal_data();
  TrainConfig tc;
  tc.max_epochs = 1;
  const std::vector<double> rates{0.0, 0.5};
  auto fr = fit_dropout_search<double>(small(ModelKind::kTemporal, d.vocab),
                                       std::span<const EncodedSample>(d.train),
                                       std::span<const EncodedSample>(d.validation), tc, rates);
  CHECK((fr.model.config().dropout == 0.0 || fr.model.config().dropout == 0.5));

  // A warm start from a trained model begins at its loss.
  SpeakerModel<double> donor = fr.model;
  std::vector<double> seen;
  tc.on_epoch = [&](const std::string&, const EpochLog& row) {
    if (row.epoch == 0) seen.push_back(row.train_loss);
  };
  WarmStart<double> warm{&donor.params()};
  fit<double>(donor.config(), std::span<const EncodedSample>(d.train),
              std::span<const EncodedSample>(d.validation), tc, warm);
  REQUIRE(seen.size() == 1);
  CHECK(std::abs(seen[0] - mean_loss(donor, std::span<const EncodedSample>(d.train))) < 1e-12);
}

TEST_CASE("training log format") {
  std::ostringstream out;
  write_training_log_header(out);
  EpochLog row;
  row.epoch = 2;
  row.train_loss = 0.5;
  write_training_log_row(out, "content", row);
  const std::string s = out.str();
  CHECK(s.rfind("run\tepoch\ttrain_loss", 0) == 0);
  CHECK(s.find("content\t2\t0.5") != std::string::npos);
}

}  // namespace
}  // namespace spkcls
