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
#include <random>
#include <sstream>

#include "doctest.h"
#include "spkcls/errors.hpp"
#include "spkcls/graph.hpp"
#include "spkcls/hybrid.hpp"

namespace spkcls {
namespace {

double sigmoid(double x) { return 1 / (1 + std::exp(-x)); }

TEST_CASE("interpolate endpoints and errors") {
  const std::vector<double> pt{0.7, 0.2, 0.1};
  const std::vector<double> pc{0.1, 0.3, 0.6};
  CHECK(interpolate(pt, pc, 0.0) == pt);
  CHECK(interpolate(pt, pc, 1.0) == pc);
  auto mid = interpolate(pt, pc, 0.25);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(mid[i] - (0.75 * pt[i] + 0.25 * pc[i])) < 1e-15);
  CHECK_THROWS_AS(interpolate(pt, pc, 1.5), ContractError);
  CHECK_THROWS_AS(interpolate(pt, std::vector<double>{1.0}, 0.5), ContractError);
}

TEST_CASE("self-adaptive gate") {
  const std::vector<double> uniform(5, 0.2);
  CHECK(population_std(uniform) == 0.0);
  CHECK(std::abs(self_adaptive_gate(uniform, 5, -1) - sigmoid(-1)) < 1e-12);
  const std::vector<double> peaked{1, 0, 0, 0, 0};
  CHECK(std::abs(population_std(peaked) - 0.4) < 1e-15);
  CHECK(std::abs(self_adaptive_gate(peaked, 10, -2) - 0.880797) < 1e-6);
}

TEST_CASE("graph forms agree with the numeric forms") {
  Graph<double> g;
  Var pt = g.constant({3, 1}, {0.7, 0.2, 0.1});
  Var pc = g.constant({3, 1}, {0.1, 0.3, 0.6});
  Var gate = self_adaptive_gate(g, pc, g.constant({1, 1}, {5}), g.constant({1, 1}, {-1}));
  const double want_gate = self_adaptive_gate(std::vector<double>{0.1, 0.3, 0.6}, 5, -1);
  CHECK(std::abs(g.scalar(gate) - want_gate) < 1e-15);
  Var p = interpolate(g, pt, pc, gate);
  auto want = interpolate(std::vector<double>{0.7, 0.2, 0.1}, std::vector<double>{0.1, 0.3, 0.6},
                          want_gate);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(g.value(p)[i] - want[i]) < 1e-15);
  CHECK(std::abs(g.scalar(negative_log_likelihood(g, p, 2)) + std::log(want[2])) < 1e-15);
  Var zero = g.constant({2, 1}, {1, 0});
  CHECK(std::abs(g.scalar(negative_log_likelihood(g, zero, 1)) + std::log(kProbFloor)) < 1e-9);
}

TEST_CASE("g grids") {
  auto grid = g_grid(0.05);
  REQUIRE(grid.size() == 21);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  CHECK(grid[10] == 0.5);
  CHECK_THROWS_AS(g_grid(0.3), ContractError);
  CHECK(parse_g_grid("0:0.25:1") == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  CHECK(parse_g_grid("0.5, 0.1") == std::vector<double>{0.1, 0.5});
  CHECK_THROWS_AS(parse_g_grid("0:0.5:2"), ContractError);
  CHECK_THROWS_AS(parse_g_grid("-0.1"), ContractError);
  CHECK_THROWS_AS(parse_g_grid("a,b"), ContractError);
}

TEST_CASE("sweep picks the smallest best g and finds complementary maxima") {
  // Uniform predictors: a flat curve, ties resolve to g = 0.
  std::vector<SweepInput> flat(4, SweepInput{1, {0.5, 0.5}, {0.5, 0.5}});
  GateSweep f = sweep_gate(flat, g_grid(0.1));
  for (Metric m : kAllMetrics) CHECK(f.best_g.at(m) == 0.0);

  // Temporal is right on the first two samples, content on the last two;
  // only a middle g gets all four.
  std::vector<SweepInput> mix{
      {0, {0.9, 0.1}, {0.4, 0.6}},
      {0, {0.9, 0.1}, {0.4, 0.6}},
      {1, {0.6, 0.4}, {0.1, 0.9}},
      {1, {0.6, 0.4}, {0.1, 0.9}},
  };
  GateSweep s = sweep_gate(mix, g_grid(0.05));
  const double best = s.best_g.at(Metric::kAccuracy);
  CHECK(best > 0.0);
  CHECK(best < 1.0);
  CHECK(validate_g(mix, Metric::kAccuracy, g_grid(0.05)) == best);
  std::ostringstream out;
  write_sweep_table(out, s);
  CHECK(out.str().find("best") != std::string::npos);
  CHECK_THROWS_AS(sweep_gate({}, g_grid(0.5)), ContractError);
}

}  // namespace
}  // namespace spkcls
