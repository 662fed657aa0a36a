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
#ifndef SPKCLS_HYBRID_HPP_
#define SPKCLS_HYBRID_HPP_

// Convex combination of the temporal and content candidate distributions,
//   p_hybrid = (1 - g) p_temporal + g p_content,
// with g fixed by validation, learned as one global scalar, or computed per
// sample from the spread of p_content.

#include <iosfwd>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "spkcls/graph.hpp"
#include "spkcls/metrics.hpp"

namespace spkcls {

inline constexpr double kProbFloor = 1e-12;

// Throws ContractError on a length mismatch or g outside [0, 1].
std::vector<double> interpolate(std::span<const double> p_temporal,
                                std::span<const double> p_content, double g);

template <typename Real>
Var interpolate(Graph<Real>& g, Var p_temporal, Var p_content, Var gate);

// Divides by k, not k - 1: the entries are the whole distribution.
double population_std(std::span<const double> values);

// sigmoid(w * std(p_content) + b)
double self_adaptive_gate(std::span<const double> p_content, double w, double b);

template <typename Real>
Var self_adaptive_gate(Graph<Real>& g, Var p_content, Var w, Var b);

// -log(max(p[gold], kProbFloor)) as a 1x1 node.
template <typename Real>
Var negative_log_likelihood(Graph<Real>& g, Var probs, std::size_t gold);

// ---------------------------------------------------------------------------
// Validation sweep over g.

struct SweepInput {
  std::size_t gold = 0;
  std::vector<double> p_temporal;
  std::vector<double> p_content;
};

struct SweepRow {
  double g = 0;
  MetricsReport report;
};

struct GateSweep {
  std::vector<SweepRow> rows;
  // Per metric, the grid value with the highest score; the smallest such g
  // wins ties.
  std::map<Metric, double> best_g;
};

// {0, step, 2 step, ..., 1}; step must divide 1 into a whole number of parts.
std::vector<double> g_grid(double step = 0.05);

// Accepts "lo:step:hi" or a comma-separated list; every value must lie in
// [0, 1]. Throws ContractError otherwise.
std::vector<double> parse_g_grid(std::string_view spec);

// Throws ContractError on an empty validation set or grid.
GateSweep sweep_gate(std::span<const SweepInput> validation, std::span<const double> grid);

double validate_g(std::span<const SweepInput> validation, Metric metric,
                  std::span<const double> grid);

void write_sweep_table(std::ostream& out, const GateSweep& sweep);

}  // namespace spkcls

#endif  // SPKCLS_HYBRID_HPP_
