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
#ifndef SPKCLS_GRAPH_HPP_
#define SPKCLS_GRAPH_HPP_

// Reverse-mode differentiation over a linear tape.
//
// Every op appends one node whose inputs are earlier nodes, so the tape is
// always in topological order and backward() is a single reverse sweep.
// Parameter leaves alias the caller's Parameter storage: their values are
// read in place and backward() accumulates straight into Parameter::grad.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "spkcls/tensor.hpp"

namespace spkcls {

struct Var {
  std::uint32_t id = 0;
  friend constexpr bool operator==(Var, Var) = default;
};

enum class OpKind : std::uint8_t {
  kConstant,
  kParam,
  kMatmul,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAffine,
  kTanh,
  kSigmoid,
  kLog,
  kConcat,
  kStack,
  kTranspose,
  kSlice,
  kRow,
  kSoftmax,
  kSum,
  kMean,
  kPick,
  kClampMin,
  kStdPop,
  kDropout,
  kLstmCell,
};

std::string_view op_name(OpKind op);

struct GraphOptions {
  // Throw NumericError as soon as any op produces NaN/Inf.
  bool check_finite = false;
  // Enables dropout.
  bool training = false;
  std::uint64_t seed = 0;
};

template <typename Real>
class Graph {
 public:
  explicit Graph(GraphOptions options = {});

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  Var constant(Tensor<Real> t);
  Var constant(Shape shape, std::vector<Real> values);
  Var zeros(Shape shape);
  Var param(Parameter<Real>& p);

  // [m x n] * [n x p]
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  // x scaled by the 1x1 node s.
  Var scale(Var x, Var s);
  // a * x + b with constant a, b.
  Var affine(Var x, Real a, Real b);
  Var tanh(Var x);
  Var sigmoid(Var x);
  Var log(Var x);
  // Row-wise concatenation; all parts share a column count.
  Var concat(std::span<const Var> parts);
  // k vectors of length n -> k x n matrix.
  Var stack(std::span<const Var> rows);
  Var transpose(Var x);
  Var slice(Var x, std::size_t begin, std::size_t count);
  // Row `index` of a table, returned as a column vector.
  Var row(Var table, std::size_t index);
  Var softmax(Var x);
  Var sum(Var x);
  Var mean(Var x);
  Var pick(Var x, std::size_t index);
  Var clamp_min(Var x, Real floor);
  // Population standard deviation of all entries.
  Var std_pop(Var x);
  // Inverted dropout; identity outside training or at rate 0.
  Var dropout(Var x, Real rate);
  // One LSTM step. state = [h; c] (2d x 1), weights 4d x (dx + d) with gate
  // rows ordered input, forget, output, candidate; returns the new [h; c].
  Var lstm_cell(Var x, Var state, Var weights, Var bias);

  // Requires a 1x1 loss. Consumes the tape; call reset() before reuse.
  void backward(Var loss);

  std::span<const Real> value(Var v) const;
  Real scalar(Var v) const;
  Shape shape(Var v) const;
  // Gradient of a non-parameter node after backward(); empty if the node
  // does not depend on any parameter.
  std::span<const Real> grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  bool training() const { return options_.training; }
  const GraphOptions& options() const { return options_; }
  void reset();

 private:
  struct Node {
    OpKind op = OpKind::kConstant;
    Shape shape;
    std::vector<Real> value;
    std::vector<Real> grad;
    std::vector<Real> cache;
    std::array<std::uint32_t, 4> in{};
    std::vector<std::uint32_t> many;
    std::size_t index = 0;
    Real a = 0;
    Real b = 0;
    Parameter<Real>* param = nullptr;
    bool requires_grad = false;
  };

  Node& push(OpKind op, Shape shape);
  Var finish();
  const Node& node(Var v) const;
  std::span<const Real> values_of(std::uint32_t id) const;
  std::span<Real> grad_sink(std::uint32_t id);
  bool needs(std::uint32_t id) const { return nodes_[id].requires_grad; }
  Var unary(OpKind op, Var x);
  Var binary(OpKind op, Var a, Var b);
  void backward_node(std::uint32_t id);

  GraphOptions options_;
  std::vector<Node> nodes_;
  std::mt19937_64 rng_;
  bool consumed_ = false;
};

}  // namespace spkcls

#endif  // SPKCLS_GRAPH_HPP_
