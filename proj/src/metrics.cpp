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
#include "spkcls/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>

#include "spkcls/errors.hpp"
#include "spkcls/speaker_models.hpp"

namespace spkcls {

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kMacroF1: return "macro-f1";
    case Metric::kWeightedF1: return "weighted-f1";
    case Metric::kMicroF1: return "micro-f1";
    case Metric::kAccuracy: return "acc";
    case Metric::kMrr: return "mrr";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (metric_name(m) == name) return m;
  }
  throw ContractError("unknown metric '" + std::string(name) + "'");
}

double MetricsReport::get(Metric m) const {
  switch (m) {
    case Metric::kMacroF1: return macro_f1;
    case Metric::kWeightedF1: return weighted_f1;
    case Metric::kMicroF1: return micro_f1;
    case Metric::kAccuracy: return accuracy;
    case Metric::kMrr: return mrr.value_or(0.0);
  }
  return 0.0;
}

std::size_t gold_rank_position(std::span<const double> probs, std::size_t gold) {
  if (gold >= probs.size()) throw ContractError("gold index outside distribution");
  std::size_t pos = 1;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] > probs[gold] || (j < gold && probs[j] == probs[gold])) ++pos;
  }
  return pos;
}

MetricsReport evaluate(std::span<const PredictionRecord> records) {
  if (records.empty()) throw ContractError("evaluate: no predictions");
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0, predicted = 0;
  };
  std::map<std::size_t, Counts> classes;
  std::size_t correct = 0;
  bool ranked = true;
  double rr_total = 0;
  for (const auto& r : records) {
    auto& g = classes[r.gold];
    auto& p = classes[r.predicted];
    ++g.support;
    ++p.predicted;
    if (r.gold == r.predicted) {
      ++g.tp;
      ++correct;
    } else {
      ++g.fn;
      ++p.fp;
    }
    if (r.probs.empty()) {
      ranked = false;
    } else {
      validate_distribution(r.probs, 1e-6, false);
      rr_total += 1.0 / static_cast<double>(gold_rank_position(r.probs, r.gold));
    }
  }
  MetricsReport rep;
  rep.count = records.size();
  const double n = static_cast<double>(records.size());
  double macro = 0, weighted = 0;
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& [cls, c] : classes) {
    ClassScore s;
    s.rank = static_cast<int>(cls + 1);
    s.support = c.support;
    s.predicted = c.predicted;
    s.precision = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    s.recall = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    s.f1 = s.precision + s.recall > 0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    macro += s.f1;
    weighted += s.f1 * static_cast<double>(c.support);
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
    rep.per_class.push_back(s);
  }
  rep.macro_f1 = macro / static_cast<double>(classes.size());
  rep.weighted_f1 = weighted / n;
  const double micro_p = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double micro_r = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  rep.micro_f1 = micro_p + micro_r > 0 ? 2.0 * micro_p * micro_r / (micro_p + micro_r) : 0.0;
  rep.accuracy = static_cast<double>(correct) / n;
  if (ranked) rep.mrr = rr_total / n;
  return rep;
}

namespace {

std::string Pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

}  // namespace

void write_report_table(std::ostream& out, std::span<const NamedReport> rows) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  std::string name_col = "Model";
  name_col.resize(width, ' ');
  out << name_col << " | " << pad("Macro F1", 11) << pad("Weighted F1", 13)
      << pad("Micro F1", 11) << " | " << pad("Acc.", 8) << pad("MRR", 8) << "\n";
  out << std::string(width + 3 + 11 + 13 + 11 + 3 + 16, '-') << "\n";
  for (const auto& r : rows) {
    std::string n = r.name;
    n.resize(width, ' ');
    out << n << " | " << pad(Pct(r.report.macro_f1), 11)
        << pad(Pct(r.report.weighted_f1), 13) << pad(Pct(r.report.micro_f1), 11)
        << " | " << pad(Pct(r.report.accuracy), 8)
        << pad(r.report.mrr ? Pct(*r.report.mrr) : std::string("N/A"), 8) << "\n";
  }
}

void write_report_records(std::ostream& out, std::span<const NamedReport> rows) {
  char buf[64];
  for (const auto& r : rows) {
    for (Metric m : kAllMetrics) {
      out << r.name << "\t" << metric_name(m) << "=";
      if (m == Metric::kMrr && !r.report.mrr) {
        out << "NA\n";
        continue;
      }
      std::snprintf(buf, sizeof(buf), "%.17g", r.report.get(m));
      out << buf << "\n";
    }
    out << r.name << "\tcount=" << r.report.count << "\n";
  }
}

std::string_view baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kRandom: return "Random guess";
    case BaselineKind::kMajority: return "Majority guess";
    case BaselineKind::kHybridGuess: return "Hybrid random/majority guess";
  }
  return "unknown";
}

std::vector<PredictionRecord> baseline_predictions(BaselineKind kind,
                                                   std::span<const SlotLabel> train,
                                                   std::span<const SlotLabel> eval,
                                                   std::uint64_t seed) {
  std::vector<double> prior;
  for (const auto& s : train) {
    if (s.gold >= prior.size()) prior.resize(s.gold + 1, 0.0);
    prior[s.gold] += 1.0;
  }
  std::size_t majority = 0;
  for (std::size_t i = 1; i < prior.size(); ++i) {
    if (prior[i] > prior[majority]) majority = i;
  }
  std::mt19937_64 rng(seed);
  std::vector<PredictionRecord> out;
  out.reserve(eval.size());
  for (const auto& s : eval) {
    if (s.k == 0 || s.gold >= s.k) throw ContractError("baseline: bad evaluation label");
    PredictionRecord r;
    r.gold = s.gold;
    switch (kind) {
      case BaselineKind::kRandom:
        r.predicted = std::uniform_int_distribution<std::size_t>(0, s.k - 1)(rng);
        break;
      case BaselineKind::kMajority:
        r.predicted = majority < s.k ? majority : 0;
        break;
      case BaselineKind::kHybridGuess: {
        std::vector<double> w(s.k, 0.0);
        double mass = 0;
        for (std::size_t i = 0; i < s.k && i < prior.size(); ++i) {
          w[i] = prior[i];
          mass += prior[i];
        }
        if (mass == 0) std::fill(w.begin(), w.end(), 1.0);
        r.predicted = std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng);
        break;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

MetricsReport baseline(BaselineKind kind, std::span<const SlotLabel> train,
                       std::span<const SlotLabel> eval, std::uint64_t seed) {
  const auto preds = baseline_predictions(kind, train, eval, seed);
  return evaluate(preds);
}

}  // namespace spkcls
