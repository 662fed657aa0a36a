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
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "spkcls/errors.hpp"
#include "spkcls/graph.hpp"
#include "spkcls/params.hpp"

namespace spkcls {
namespace {

using G = Graph<double>;
using P = Parameter<double>;

P make_param(std::string name, Shape shape, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  P p{std::move(name), Tensor<double>(shape), std::vector<double>(shape.size())};
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : p.value.values) v = u(rng);
  return p;
}

// Checks d/dp of sum(r .* f(params)) for a random projection r.
void check_op_grad(std::vector<P>& params, const std::function<Var(G&, std::vector<Var>&)>& f,
                   double tol = 1e-6, GraphOptions options = {}) {
  std::mt19937_64 rng(123);
  std::vector<double> proj;
  auto loss = [&](G& g) {
    std::vector<Var> leaves;
    for (auto& p : params) leaves.push_back(g.param(p));
    Var out = f(g, leaves);
    if (proj.empty()) {
      std::uniform_real_distribution<double> u(-1, 1);
      proj.resize(g.shape(out).size());
      for (auto& v : proj) v = u(rng);
    }
    Var r = g.constant(g.shape(out), proj);
    return g.sum(g.mul(out, r));
  };
  for (auto& p : params) std::fill(p.grad.begin(), p.grad.end(), 0.0);
  {
    G g(options);
    g.backward(loss(g));
  }
  const double h = 1e-6;
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.value.values.size(); ++i) {
      const double saved = p.value.values[i];
      p.value.values[i] = saved + h;
      G gu(options);
      const double up = gu.scalar(loss(gu));
      p.value.values[i] = saved - h;
      G gd(options);
      const double down = gd.scalar(loss(gd));
      p.value.values[i] = saved;
      CAPTURE(p.name);
      CAPTURE(i);
      CHECK(testing::rel_error(p.grad[i], (up - down) / (2 * h)) < tol);
    }
  }
}

TEST_CASE("forward values of elementary ops") {
  G g;
  Var a = g.constant({2, 3}, {1, 2, 3, 4, 5, 6});
  Var b = g.constant({3, 2}, {7, 8, 9, 10, 11, 12});
  Var m = g.matmul(a, b);
  CHECK(g.shape(m) == Shape{2, 2});
  CHECK(std::vector<double>(g.value(m).begin(), g.value(m).end()) ==
        std::vector<double>{58, 64, 139, 154});

  Var t = g.transpose(a);
  CHECK(g.shape(t) == Shape{3, 2});
  CHECK(g.value(t)[1] == 4);

  Var v = g.constant({4, 1}, {1, 2, 3, 4});
  CHECK(g.scalar(g.sum(v)) == 10);
  CHECK(g.scalar(g.mean(v)) == 2.5);
  CHECK(g.scalar(g.std_pop(v)) == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
  CHECK(g.scalar(g.pick(v, 2)) == 3);
  CHECK(g.value(g.slice(v, 1, 2))[0] == 2);
  CHECK(g.value(g.clamp_min(g.affine(v, 1, -2.5), 0))[0] == 0);
  CHECK(g.value(g.affine(v, 2, 1))[3] == 9);
  CHECK(g.scalar(g.sigmoid(g.constant({1, 1}, {0}))) == 0.5);
  CHECK(g.value(g.row(a, 1))[2] == 6);
  CHECK(g.shape(g.row(a, 1)) == Shape{3, 1});

  Var parts[] = {g.constant({2, 1}, {1, 2}), g.constant({1, 1}, {3})};
  CHECK(g.shape(g.concat(parts)) == Shape{3, 1});
  Var rows[] = {g.constant({2, 1}, {1, 2}), g.constant({2, 1}, {3, 4})};
  Var st = g.stack(rows);
  CHECK(g.shape(st) == Shape{2, 2});
  CHECK(g.value(st)[2] == 3);
}

TEST_CASE("softmax values and shift invariance") {
  G g;
  Var s = g.softmax(g.constant({3, 1}, {1, 2, 3}));
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(g.value(s)[0] == doctest::Approx(std::exp(1.0) / z).epsilon(1e-14));
  CHECK(g.value(s)[2] == doctest::Approx(std::exp(3.0) / z).epsilon(1e-14));
  Var big = g.softmax(g.constant({3, 1}, {1001, 1002, 1003}));
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(g.value(big)[i] - g.value(s)[i]) < 1e-12);
}

TEST_CASE("shape errors") {
  G g;
  Var a = g.constant({2, 3}, std::vector<double>(6, 1));
  Var b = g.constant({2, 1}, {1, 1});
  CHECK_THROWS_AS(g.matmul(a, b), DimensionError);
  CHECK_THROWS_AS(g.add(a, b), DimensionError);
  CHECK_THROWS_AS(g.slice(b, 1, 2), DimensionError);
  CHECK_THROWS_AS(g.constant({2, 2}, {1, 2, 3}), DimensionError);
  Var parts[] = {a, b};
  CHECK_THROWS_AS(g.concat(parts), DimensionError);
  CHECK_THROWS_AS(g.backward(b), ContractError);
}

TEST_CASE("finite checking") {
  G strict(GraphOptions{.check_finite = true});
  CHECK_THROWS_AS(strict.log(strict.constant({1, 1}, {0})), NumericError);
  CHECK_THROWS_AS(strict.log(strict.constant({1, 1}, {-1})), NumericError);
  G loose;
  CHECK(std::isinf(loose.scalar(loose.log(loose.constant({1, 1}, {0})))));
}

TEST_CASE("dropout") {
  std::vector<double> ones(1000, 1.0);
  G eval_graph(GraphOptions{.training = false, .seed = 1});
  Var x = eval_graph.constant({1000, 1}, ones);
  CHECK(eval_graph.dropout(x, 0.5) == x);

  G g1(GraphOptions{.training = true, .seed = 9});
  G g2(GraphOptions{.training = true, .seed = 9});
  Var d1 = g1.dropout(g1.constant({1000, 1}, ones), 0.5);
  Var d2 = g2.dropout(g2.constant({1000, 1}, ones), 0.5);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const double v = g1.value(d1)[i];
    CHECK((v == 0.0 || v == 2.0));
    CHECK(v == g2.value(d2)[i]);
    kept += v != 0.0;
  }
  CHECK(kept > 430);
  CHECK(kept < 570);
  Var same = g1.constant({2, 1}, {1, 2});
  CHECK(g1.dropout(same, 0) == same);
}

TEST_CASE("gradients of every op") {
  std::mt19937_64 rng(5);
  SUBCASE("matmul add sub mul transpose") {
    std::vector<P> ps{make_param("a", {2, 3}, rng), make_param("b", {3, 2}, rng),
                      make_param("c", {2, 2}, rng)};
    check_op_grad(ps, [](G& g, std::vector<Var>& v) {
      Var m = g.matmul(v[0], v[1]);
      return g.mul(g.sub(g.add(m, v[2]), g.transpose(m)), v[2]);
    });
  }
  SUBCASE("scale affine tanh sigmoid log") {
    std::vector<P> ps{make_param("x", {4, 1}, rng, 0.2, 2), make_param("s", {1, 1}, rng)};
    check_op_grad(ps, [](G& g, std::vector<Var>& v) {
      Var a = g.log(g.affine(v[0], 2, 0.5));
      return g.add(g.scale(g.tanh(a), v[1]), g.sigmoid(v[0]));
    });
  }
  SUBCASE("concat stack slice row pick") {
    std::vector<P> ps{make_param("x", {3, 1}, rng), make_param("y", {3, 1}, rng),
                      make_param("t", {4, 3}, rng)};
    check_op_grad(ps, [](G& g, std::vector<Var>& v) {
      Var parts[] = {v[0], v[1], g.row(v[2], 2)};
      Var c = g.concat(parts);
      Var rows[] = {g.slice(c, 1, 3), v[1]};
      Var st = g.stack(rows);
      Var picks[] = {g.pick(st, 4), g.pick(c, 0)};
      return g.concat(picks);
    });
  }
  SUBCASE("softmax sum mean std clamp") {
    std::vector<P> ps{make_param("x", {5, 1}, rng)};
    check_op_grad(ps, [](G& g, std::vector<Var>& v) {
      Var s = g.softmax(v[0]);
      Var parts[] = {s, g.std_pop(v[0]), g.mean(v[0]), g.sum(g.clamp_min(v[0], 0.05))};
      return g.concat(parts);
    });
  }
  SUBCASE("dropout in training") {
    std::vector<P> ps{make_param("x", {6, 1}, rng)};
    // The mask depends only on the seed, so it is the same in every pass.
    check_op_grad(
        ps, [](G& g, std::vector<Var>& v) { return g.dropout(g.tanh(v[0]), 0.5); }, 1e-6,
        GraphOptions{.training = true, .seed = 3});
  }
}

// The fused LSTM cell against the same step written with primitive ops.
Var composed_lstm(G& g, Var x, Var state, Var w, Var b, std::size_t d) {
  Var h = g.slice(state, 0, d);
  Var c = g.slice(state, d, d);
  Var xh_parts[] = {x, h};
  Var z = g.add(g.matmul(w, g.concat(xh_parts)), b);
  Var i = g.sigmoid(g.slice(z, 0, d));
  Var f = g.sigmoid(g.slice(z, d, d));
  Var o = g.sigmoid(g.slice(z, 2 * d, d));
  Var cand = g.tanh(g.slice(z, 3 * d, d));
  Var c2 = g.add(g.mul(f, c), g.mul(i, cand));
  Var h2 = g.mul(o, g.tanh(c2));
  Var out[] = {h2, c2};
  return g.concat(out);
}

TEST_CASE("fused lstm cell matches the composed oracle") {
  std::mt19937_64 rng(77);
  const std::size_t dx = 3, d = 4;
  std::vector<P> ps{make_param("x", {dx, 1}, rng), make_param("state", {2 * d, 1}, rng),
                    make_param("W", {4 * d, dx + d}, rng), make_param("b", {4 * d, 1}, rng)};
  auto run = [&](bool fused) {
    for (auto& p : ps) std::fill(p.grad.begin(), p.grad.end(), 0.0);
    G g;
    std::vector<Var> v;
    for (auto& p : ps) v.push_back(g.param(p));
    // Two steps so the state path is exercised.
    Var s1 = fused ? g.lstm_cell(v[0], v[1], v[2], v[3]) : composed_lstm(g, v[0], v[1], v[2], v[3], d);
    Var s2 = fused ? g.lstm_cell(v[0], s1, v[2], v[3]) : composed_lstm(g, v[0], s1, v[2], v[3], d);
    std::vector<double> value(g.value(s2).begin(), g.value(s2).end());
    std::vector<double> proj(2 * d);
    for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = 0.1 * static_cast<double>(i + 1);
    g.backward(g.sum(g.mul(s2, g.constant({2 * d, 1}, proj))));
    std::vector<std::vector<double>> grads;
    for (auto& p : ps) grads.push_back(p.grad);
    return std::make_pair(value, grads);
  };
  auto [fv, fg] = run(true);
  auto [cv, cg] = run(false);
  for (std::size_t i = 0; i < fv.size(); ++i) CHECK(std::abs(fv[i] - cv[i]) < 1e-14);
  for (std::size_t p = 0; p < fg.size(); ++p) {
    for (std::size_t i = 0; i < fg[p].size(); ++i) {
      CAPTURE(ps[p].name);
      CHECK(std::abs(fg[p][i] - cg[p][i]) < 1e-13);
    }
  }
  check_op_grad(ps, [](G& g, std::vector<Var>& v) {
    return g.lstm_cell(v[0], g.lstm_cell(v[0], v[1], v[2], v[3]), v[2], v[3]);
  });
}

TEST_CASE("float graph agrees with double") {
  Graph<float> gf;
  G gd;
  Var a = gf.softmax(gf.constant({3, 1}, {0.1f, -0.4f, 2.0f}));
  Var b = gd.softmax(gd.constant({3, 1}, {0.1, -0.4, 2.0}));
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(gf.value(a)[i] - gd.value(b)[i]) < 1e-6);
}

TEST_CASE("parameter gradients accumulate across backward calls") {
  std::mt19937_64 rng(1);
  P p = make_param("p", {2, 1}, rng);
  for (int rep = 0; rep < 2; ++rep) {
    G g;
    g.backward(g.sum(g.param(p)));
  }
  CHECK(p.grad[0] == 2.0);
  CHECK(p.grad[1] == 2.0);
}

}  // namespace
}  // namespace spkcls
