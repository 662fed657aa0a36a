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
#include "spkcls/hybrid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "spkcls/errors.hpp"
#include "spkcls/speaker_models.hpp"

namespace spkcls {

std::vector<double> interpolate(std::span<const double> p_temporal,
                                std::span<const double> p_content, double g) {
  if (p_temporal.size() != p_content.size()) {
    throw ContractError("interpolate: distributions over different candidate sets");
  }
  if (!(g >= 0.0 && g <= 1.0)) throw ContractError("interpolate: g outside [0, 1]");
  std::vector<double> out(p_temporal.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - g) * p_temporal[i] + g * p_content[i];
  }
  return out;
}

template <typename Real>
Var interpolate(Graph<Real>& g, Var p_temporal, Var p_content, Var gate) {
  if (g.shape(p_temporal) != g.shape(p_content)) {
    throw ContractError("interpolate: distributions over different candidate sets");
  }
  return g.add(p_temporal, g.scale(g.sub(p_content, p_temporal), gate));
}

double population_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double n = static_cast<double>(values.size());
  double mu = 0;
  for (double v : values) mu += v;
  mu /= n;
  double var = 0;
  for (double v : values) var += (v - mu) * (v - mu);
  return std::sqrt(var / n);
}

double self_adaptive_gate(std::span<const double> p_content, double w, double b) {
  const double z = w * population_std(p_content) + b;
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

template <typename Real>
Var self_adaptive_gate(Graph<Real>& g, Var p_content, Var w, Var b) {
  return g.sigmoid(g.add(g.scale(g.std_pop(p_content), w), b));
}

template <typename Real>
Var negative_log_likelihood(Graph<Real>& g, Var probs, std::size_t gold) {
  const Var p = g.clamp_min(g.pick(probs, gold), static_cast<Real>(kProbFloor));
  return g.affine(g.log(p), Real(-1), Real(0));
}

std::vector<double> g_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ContractError("g grid step must be in (0, 1]");
  const double parts = 1.0 / step;
  const long n = std::lround(parts);
  if (std::abs(parts - static_cast<double>(n)) > 1e-9) {
    throw ContractError("g grid step must divide 1 evenly");
  }
  std::vector<double> grid;
  for (long i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(n));
  return grid;
}

namespace {

double ParseNumber(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ContractError("bad number '" + std::string(s) + "' in g grid");
  }
  return v;
}

}  // namespace

std::vector<double> parse_g_grid(std::string_view spec) {
  std::vector<double> grid;
  if (std::count(spec.begin(), spec.end(), ':') == 2) {
    const auto a = spec.find(':');
    const auto b = spec.find(':', a + 1);
    const double lo = ParseNumber(spec.substr(0, a));
    const double step = ParseNumber(spec.substr(a + 1, b - a - 1));
    const double hi = ParseNumber(spec.substr(b + 1));
    if (!(step > 0) || hi < lo) throw ContractError("g grid: need step > 0 and lo <= hi");
    const long n = std::lround((hi - lo) / step);
    if (std::abs((hi - lo) / step - static_cast<double>(n)) > 1e-9) {
      throw ContractError("g grid: step must divide [lo, hi] evenly");
    }
    for (long i = 0; i <= n; ++i) {
      grid.push_back(n == 0 ? lo
                            : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n));
    }
  } else {
    std::size_t start = 0;
    while (start <= spec.size()) {
      auto comma = spec.find(',', start);
      if (comma == std::string_view::npos) comma = spec.size();
      grid.push_back(ParseNumber(spec.substr(start, comma - start)));
      start = comma + 1;
    }
  }
  if (grid.empty()) throw ContractError("g grid is empty");
  for (double g : grid) {
    if (!(g >= 0.0 && g <= 1.0)) throw ContractError("g grid values must lie in [0, 1]");
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

GateSweep sweep_gate(std::span<const SweepInput> validation, std::span<const double> grid) {
  if (validation.empty()) throw ContractError("validate_g: empty validation set");
  if (grid.empty()) throw ContractError("validate_g: empty grid");
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  GateSweep sweep;
  std::vector<PredictionRecord> records(validation.size());
  for (double g : sorted) {
    for (std::size_t i = 0; i < validation.size(); ++i) {
      const auto& v = validation[i];
      records[i].gold = v.gold;
      records[i].probs = interpolate(v.p_temporal, v.p_content, g);
      records[i].predicted = predict(records[i].probs);
    }
    sweep.rows.push_back({g, evaluate(records)});
  }
  for (Metric m : kAllMetrics) {
    const SweepRow* best = &sweep.rows.front();
    for (const auto& row : sweep.rows) {
      if (row.report.get(m) > best->report.get(m)) best = &row;
    }
    sweep.best_g[m] = best->g;
  }
  return sweep;
}

double validate_g(std::span<const SweepInput> validation, Metric metric,
                  std::span<const double> grid) {
  return sweep_gate(validation, grid).best_g.at(metric);
}

void write_sweep_table(std::ostream& out, const GateSweep& sweep) {
  out << "g\tmacro-f1\tweighted-f1\tmicro-f1\tacc\tmrr\n";
  char buf[160];
  for (const auto& row : sweep.rows) {
    const auto& r = row.report;
    std::snprintf(buf, sizeof(buf), "%.4f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\n", row.g,
                  r.macro_f1, r.weighted_f1, r.micro_f1, r.accuracy, r.get(Metric::kMrr));
    out << buf;
  }
  for (const auto& [m, g] : sweep.best_g) {
    std::snprintf(buf, sizeof(buf), "# best g for %s: %.4f\n",
                  std::string(metric_name(m)).c_str(), g);
    out << buf;
  }
}

#define SPKCLS_INSTANTIATE_HYBRID(Real)                                      \
  template Var interpolate<Real>(Graph<Real>&, Var, Var, Var);               \
  template Var self_adaptive_gate<Real>(Graph<Real>&, Var, Var, Var);        \
  template Var negative_log_likelihood<Real>(Graph<Real>&, Var, std::size_t);

SPKCLS_INSTANTIATE_HYBRID(float)
SPKCLS_INSTANTIATE_HYBRID(double)

}  // namespace spkcls
