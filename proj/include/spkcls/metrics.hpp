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
#ifndef SPKCLS_METRICS_HPP_
#define SPKCLS_METRICS_HPP_

// Classification metrics over recency-rank classes. Candidate index i of a
// sample is rank i + 1, so indices double as class labels.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spkcls {

enum class Metric { kMacroF1, kWeightedF1, kMicroF1, kAccuracy, kMrr };

inline constexpr Metric kAllMetrics[] = {Metric::kMacroF1, Metric::kWeightedF1,
                                         Metric::kMicroF1, Metric::kAccuracy,
                                         Metric::kMrr};

std::string_view metric_name(Metric m);  // macro-f1, weighted-f1, ...
Metric parse_metric(std::string_view name);

struct PredictionRecord {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::vector<double> probs;  // empty for predictors without a ranking
};

struct ClassScore {
  int rank = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;  // gold count
  std::size_t predicted = 0;
};

struct MetricsReport {
  double macro_f1 = 0;
  double weighted_f1 = 0;
  double micro_f1 = 0;
  double accuracy = 0;
  std::optional<double> mrr;  // absent when any record lacks probs
  std::vector<ClassScore> per_class;
  std::size_t count = 0;

  // MRR reads as 0 when absent.
  double get(Metric m) const;
};

// Position of the gold candidate when candidates are ordered by descending
// probability with ties going to the lower index: 1 + #{p_j > p_gold} +
// #{j < gold : p_j == p_gold}.
std::size_t gold_rank_position(std::span<const double> probs, std::size_t gold);

// Classes are the ranks present in gold or predicted labels. Per-class F1 is
// 0 when precision + recall is 0. Throws ContractError on empty input or an
// invalid distribution.
MetricsReport evaluate(std::span<const PredictionRecord> records);

// Table-layout rendering: one row per named report.
struct NamedReport {
  std::string name;
  MetricsReport report;
};
void write_report_table(std::ostream& out, std::span<const NamedReport> rows);
// key=value records, one metric per line, prefixed by the row name.
void write_report_records(std::ostream& out, std::span<const NamedReport> rows);

// ---------------------------------------------------------------------------
// Baselines

enum class BaselineKind { kRandom, kMajority, kHybridGuess };

std::string_view baseline_name(BaselineKind kind);

struct SlotLabel {
  std::size_t k = 0;
  std::size_t gold = 0;
};

// random: uniform over each sample's k candidates.
// majority: the most frequent training label (lowest index on ties), falling
//   back to index 0 when the sample has fewer candidates.
// hybrid guess: a draw from the training label distribution restricted to the
//   sample's k candidates; an interpretation, the source gives no definition.
// None of them produce probabilities, so MRR is not reported.
std::vector<PredictionRecord> baseline_predictions(BaselineKind kind,
                                                   std::span<const SlotLabel> train,
                                                   std::span<const SlotLabel> eval,
                                                   std::uint64_t seed);

MetricsReport baseline(BaselineKind kind, std::span<const SlotLabel> train,
                       std::span<const SlotLabel> eval, std::uint64_t seed);

}  // namespace spkcls

#endif  // SPKCLS_METRICS_HPP_
