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
#include "spkcls/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spkcls/errors.hpp"
#include "spkcls/kernels.hpp"

namespace spkcls {

std::string_view op_name(OpKind op) {
  switch (op) {
    case OpKind::kConstant: return "constant";
    case OpKind::kParam: return "param";
    case OpKind::kMatmul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kAffine: return "affine";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kLog: return "log";
    case OpKind::kConcat: return "concat";
    case OpKind::kStack: return "stack";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kSlice: return "slice";
    case OpKind::kRow: return "row";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kPick: return "pick";
    case OpKind::kClampMin: return "clamp_min";
    case OpKind::kStdPop: return "std_pop";
    case OpKind::kDropout: return "dropout";
    case OpKind::kLstmCell: return "lstm_cell";
  }
  return "unknown";
}

namespace {

[[noreturn]] void ShapeFail(OpKind op, std::initializer_list<Shape> shapes) {
  std::string msg = std::string(op_name(op)) + ": incompatible shapes";
  for (const Shape& s : shapes) msg += " " + s.to_string();
  throw DimensionError(msg);
}

template <typename Real>
Real Sigmoid(Real x) {
  if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

bool IsVector(Shape s) { return s.rows == 1 || s.cols == 1; }

}  // namespace

template <typename Real>
Graph<Real>::Graph(GraphOptions options)
    : options_(options), rng_(options.seed) {
  nodes_.reserve(256);
}

template <typename Real>
void Graph<Real>::reset() {
  nodes_.clear();
  consumed_ = false;
}

template <typename Real>
typename Graph<Real>::Node& Graph<Real>::push(OpKind op, Shape shape) {
  Node& n = nodes_.emplace_back();
  n.op = op;
  n.shape = shape;
  if (op != OpKind::kParam) n.value.assign(shape.size(), Real(0));
  return n;
}

template <typename Real>
Var Graph<Real>::finish() {
  const auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  if (options_.check_finite) {
    const Node& n = nodes_[id];
    if (n.op != OpKind::kParam && !all_finite<Real>(n.value)) {
      throw NumericError(std::string("non-finite output from op ") +
                         std::string(op_name(n.op)));
    }
  }
  return Var{id};
}

template <typename Real>
const typename Graph<Real>::Node& Graph<Real>::node(Var v) const {
  if (v.id >= nodes_.size()) throw ContractError("variable not on this tape");
  return nodes_[v.id];
}

template <typename Real>
std::span<const Real> Graph<Real>::values_of(std::uint32_t id) const {
  const Node& n = nodes_[id];
  if (n.op == OpKind::kParam) return n.param->value.values;
  return n.value;
}

template <typename Real>
std::span<Real> Graph<Real>::grad_sink(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.op == OpKind::kParam) return n.param->grad;
  return n.grad;
}

template <typename Real>
std::span<const Real> Graph<Real>::value(Var v) const {
  node(v);
  return values_of(v.id);
}

template <typename Real>
Real Graph<Real>::scalar(Var v) const {
  const auto values = value(v);
  if (values.size() != 1) {
    throw DimensionError("scalar(): node has shape " + node(v).shape.to_string());
  }
  return values[0];
}

template <typename Real>
Shape Graph<Real>::shape(Var v) const {
  return node(v).shape;
}

template <typename Real>
std::span<const Real> Graph<Real>::grad(Var v) const {
  const Node& n = node(v);
  if (n.op == OpKind::kParam) return n.param->grad;
  return n.grad;
}

template <typename Real>
Var Graph<Real>::constant(Tensor<Real> t) {
  Node& n = push(OpKind::kConstant, t.shape);
  n.value = std::move(t.values);
  return finish();
}

template <typename Real>
Var Graph<Real>::constant(Shape shape, std::vector<Real> values) {
  return constant(Tensor<Real>(shape, std::move(values)));
}

template <typename Real>
Var Graph<Real>::zeros(Shape shape) {
  push(OpKind::kConstant, shape);
  return finish();
}

template <typename Real>
Var Graph<Real>::param(Parameter<Real>& p) {
  if (p.grad.size() != p.value.values.size()) {
    p.grad.assign(p.value.values.size(), Real(0));
  }
  Node& n = push(OpKind::kParam, p.value.shape);
  n.param = &p;
  n.requires_grad = true;
  return finish();
}

template <typename Real>
Var Graph<Real>::matmul(Var a, Var b) {
  const Shape sa = node(a).shape;
  const Shape sb = node(b).shape;
  if (sa.cols != sb.rows) ShapeFail(OpKind::kMatmul, {sa, sb});
  Node& out = push(OpKind::kMatmul, Shape{sa.rows, sb.cols});
  out.in = {a.id, b.id};
  out.requires_grad = needs(a.id) || needs(b.id);
  const auto av = values_of(a.id);
  const auto bv = values_of(b.id);
  const auto& k = kernels::active<Real>();
  if (sb.cols == 1) {
    k.gemv(av.data(), sa.rows, sa.cols, bv.data(), out.value.data());
  } else {
    for (std::size_t i = 0; i < sa.rows; ++i) {
      for (std::size_t j = 0; j < sa.cols; ++j) {
        k.axpy(av[i * sa.cols + j], bv.data() + j * sb.cols,
               out.value.data() + i * sb.cols, sb.cols);
      }
    }
  }
  return finish();
}

template <typename Real>
Var Graph<Real>::binary(OpKind op, Var a, Var b) {
  const Shape sa = node(a).shape;
  const Shape sb = node(b).shape;
  if (sa != sb) ShapeFail(op, {sa, sb});
  Node& out = push(op, sa);
  out.in = {a.id, b.id};
  out.requires_grad = needs(a.id) || needs(b.id);
  const auto av = values_of(a.id);
  const auto bv = values_of(b.id);
  for (std::size_t i = 0; i < av.size(); ++i) {
    switch (op) {
      case OpKind::kAdd: out.value[i] = av[i] + bv[i]; break;
      case OpKind::kSub: out.value[i] = av[i] - bv[i]; break;
      default: out.value[i] = av[i] * bv[i]; break;
    }
  }
  return finish();
}

template <typename Real>
Var Graph<Real>::add(Var a, Var b) {
  return binary(OpKind::kAdd, a, b);
}

template <typename Real>
Var Graph<Real>::sub(Var a, Var b) {
  return binary(OpKind::kSub, a, b);
}

template <typename Real>
Var Graph<Real>::mul(Var a, Var b) {
  return binary(OpKind::kMul, a, b);
}

template <typename Real>
Var Graph<Real>::scale(Var x, Var s) {
  const Shape sx = node(x).shape;
  const Shape ss = node(s).shape;
  if (ss.size() != 1) ShapeFail(OpKind::kScale, {sx, ss});
  Node& out = push(OpKind::kScale, sx);
  out.in = {x.id, s.id};
  out.requires_grad = needs(x.id) || needs(s.id);
  const auto xv = values_of(x.id);
  const Real factor = values_of(s.id)[0];
  for (std::size_t i = 0; i < xv.size(); ++i) out.value[i] = factor * xv[i];
  return finish();
}

template <typename Real>
Var Graph<Real>::affine(Var x, Real a, Real b) {
  const Shape sx = node(x).shape;
  Node& out = push(OpKind::kAffine, sx);
  out.in = {x.id};
  out.a = a;
  out.b = b;
  out.requires_grad = needs(x.id);
  const auto xv = values_of(x.id);
  for (std::size_t i = 0; i < xv.size(); ++i) out.value[i] = a * xv[i] + b;
  return finish();
}

template <typename Real>
Var Graph<Real>::unary(OpKind op, Var x) {
  const Shape sx = node(x).shape;
  Node& out = push(op, sx);
  out.in = {x.id};
  out.requires_grad = needs(x.id);
  const auto xv = values_of(x.id);
  for (std::size_t i = 0; i < xv.size(); ++i) {
    switch (op) {
      case OpKind::kTanh: out.value[i] = std::tanh(xv[i]); break;
      case OpKind::kSigmoid: out.value[i] = Sigmoid(xv[i]); break;
      default: out.value[i] = std::log(xv[i]); break;
    }
  }
  return finish();
}

template <typename Real>
Var Graph<Real>::tanh(Var x) {
  return unary(OpKind::kTanh, x);
}

template <typename Real>
Var Graph<Real>::sigmoid(Var x) {
  return unary(OpKind::kSigmoid, x);
}

template <typename Real>
Var Graph<Real>::log(Var x) {
  return unary(OpKind::kLog, x);
}

template <typename Real>
Var Graph<Real>::concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const std::size_t cols = node(parts[0]).shape.cols;
  std::size_t rows = 0;
  for (Var p : parts) {
    const Shape s = node(p).shape;
    if (s.cols != cols) ShapeFail(OpKind::kConcat, {node(parts[0]).shape, s});
    rows += s.rows;
  }
  Node& out = push(OpKind::kConcat, Shape{rows, cols});
  out.many.reserve(parts.size());
  std::size_t offset = 0;
  for (Var p : parts) {
    out.many.push_back(p.id);
    out.requires_grad = out.requires_grad || needs(p.id);
    const auto pv = values_of(p.id);
    std::copy(pv.begin(), pv.end(), out.value.begin() + offset);
    offset += pv.size();
  }
  return finish();
}

template <typename Real>
Var Graph<Real>::stack(std::span<const Var> rows) {
  if (rows.empty()) throw DimensionError("stack: no inputs");
  const Shape first = node(rows[0]).shape;
  if (!IsVector(first)) ShapeFail(OpKind::kStack, {first});
  const std::size_t width = first.size();
  for (Var r : rows) {
    const Shape s = node(r).shape;
    if (!IsVector(s) || s.size() != width) ShapeFail(OpKind::kStack, {first, s});
  }
  Node& out = push(OpKind::kStack, Shape{rows.size(), width});
  out.many.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.many.push_back(rows[i].id);
    out.requires_grad = out.requires_grad || needs(rows[i].id);
    const auto rv = values_of(rows[i].id);
    std::copy(rv.begin(), rv.end(), out.value.begin() + i * width);
  }
  return finish();
}

template <typename Real>
Var Graph<Real>::transpose(Var x) {
  const Shape sx = node(x).shape;
  Node& out = push(OpKind::kTranspose, Shape{sx.cols, sx.rows});
  out.in = {x.id};
  out.requires_grad = needs(x.id);
  const auto xv = values_of(x.id);
  for (std::size_t r = 0; r < sx.rows; ++r) {
    for (std::size_t c = 0; c < sx.cols; ++c) {
      out.value[c * sx.rows + r] = xv[r * sx.cols + c];
    }
  }
  return finish();
}

template <typename Real>
Var Graph<Real>::slice(Var x, std::size_t begin, std::size_t count) {
  const Shape sx = node(x).shape;
  if (count == 0 || begin + count > sx.rows) {
    throw DimensionError("slice: rows [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of range for " +
                         sx.to_string());
  }
  Node& out = push(OpKind::kSlice, Shape{count, sx.cols});
  out.in = {x.id};
  out.index = begin;
  out.requires_grad = needs(x.id);
  const auto xv = values_of(x.id);
  std::copy_n(xv.begin() + begin * sx.cols, count * sx.cols, out.value.begin());
  return finish();
}

template <typename Real>
Var Graph<Real>::row(Var table, std::size_t index) {
  const Shape st = node(table).shape;
  if (index >= st.rows) {
    throw DimensionError("row: index " + std::to_string(index) +
                         " out of range for " + st.to_string());
  }
  Node& out = push(OpKind::kRow, Shape{st.cols, 1});
  out.in = {table.id};
  out.index = index;
  out.requires_grad = needs(table.id);
  const auto tv = values_of(table.id);
  std::copy_n(tv.begin() + index * st.cols, st.cols, out.value.begin());
  return finish();
}

template <typename Real>
Var Graph<Real>::softmax(Var x) {
  const Shape sx = node(x).shape;
  if (!IsVector(sx)) ShapeFail(OpKind::kSoftmax, {sx});
  Node& out = push(OpKind::kSoftmax, sx);
  out.in = {x.id};
  out.requires_grad = needs(x.id);
  const auto xv = values_of(x.id);
  const Real top = *std::max_element(xv.begin(), xv.end());
  Real total = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    out.value[i] = std::exp(xv[i] - top);
    total += out.value[i];
  }
  for (Real& v : out.value) v /= total;
  return finish();
}

template <typename Real>
Var Graph<Real>::sum(Var x) {
  Node& out = push(OpKind::kSum, Shape{1, 1});
  out.in = {x.id};
  out.requires_grad = needs(x.id);
  Real total = 0;
  for (Real v : values_of(x.id)) total += v;
  out.value[0] = total;
  return finish();
}

template <typename Real>
Var Graph<Real>::mean(Var x) {
  Node& out = push(OpKind::kMean, Shape{1, 1});
  out.in = {x.id};
  out.requires_grad = needs(x.id);
  const auto xv = values_of(x.id);
  Real total = 0;
  for (Real v : xv) total += v;
  out.value[0] = total / static_cast<Real>(xv.size());
  return finish();
}

template <typename Real>
Var Graph<Real>::pick(Var x, std::size_t index) {
  const Shape sx = node(x).shape;
  if (index >= sx.size()) {
    throw DimensionError("pick: index " + std::to_string(index) +
                         " out of range for " + sx.to_string());
  }
  Node& out = push(OpKind::kPick, Shape{1, 1});
  out.in = {x.id};
  out.index = index;
  out.requires_grad = needs(x.id);
  out.value[0] = values_of(x.id)[index];
  return finish();
}

template <typename Real>
Var Graph<Real>::clamp_min(Var x, Real floor) {
  const Shape sx = node(x).shape;
  Node& out = push(OpKind::kClampMin, sx);
  out.in = {x.id};
  out.a = floor;
  out.requires_grad = needs(x.id);
  const auto xv = values_of(x.id);
  for (std::size_t i = 0; i < xv.size(); ++i) out.value[i] = std::max(xv[i], floor);
  return finish();
}

template <typename Real>
Var Graph<Real>::std_pop(Var x) {
  Node& out = push(OpKind::kStdPop, Shape{1, 1});
  out.in = {x.id};
  out.requires_grad = needs(x.id);
  const auto xv = values_of(x.id);
  const Real n = static_cast<Real>(xv.size());
  Real mu = 0;
  for (Real v : xv) mu += v;
  mu /= n;
  Real var = 0;
  for (Real v : xv) var += (v - mu) * (v - mu);
  var /= n;
  out.a = mu;
  out.value[0] = std::sqrt(var);
  return finish();
}

template <typename Real>
Var Graph<Real>::dropout(Var x, Real rate) {
  if (rate < 0 || rate >= 1) {
    throw ContractError("dropout: rate must be in [0, 1)");
  }
  if (!options_.training || rate == 0) return x;
  const Shape sx = node(x).shape;
  Node& out = push(OpKind::kDropout, sx);
  out.in = {x.id};
  out.requires_grad = needs(x.id);
  out.cache.resize(sx.size());
  const Real keep_scale = Real(1) / (Real(1) - rate);
  const auto xv = values_of(x.id);
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    out.cache[i] = u < rate ? Real(0) : keep_scale;
    out.value[i] = xv[i] * out.cache[i];
  }
  return finish();
}

template <typename Real>
Var Graph<Real>::lstm_cell(Var x, Var state, Var weights, Var bias) {
  const Shape sx = node(x).shape;
  const Shape ss = node(state).shape;
  const Shape sw = node(weights).shape;
  const Shape sb = node(bias).shape;
  const std::size_t d = ss.rows / 2;
  if (!sx.is_column() || !ss.is_column() || ss.rows % 2 != 0 || d == 0 ||
      sw.rows != 4 * d || sw.cols != sx.rows + d || sb != Shape{4 * d, 1}) {
    ShapeFail(OpKind::kLstmCell, {sx, ss, sw, sb});
  }
  const std::size_t dx = sx.rows;
  Node& out = push(OpKind::kLstmCell, ss);
  out.in = {x.id, state.id, weights.id, bias.id};
  out.requires_grad =
      needs(x.id) || needs(state.id) || needs(weights.id) || needs(bias.id);
  // cache: [x; h_prev] | gate activations (4d) | tanh(c_new) (d)
  out.cache.resize(dx + d + 4 * d + d);
  Real* xh = out.cache.data();
  Real* act = xh + dx + d;
  Real* tanh_c = act + 4 * d;
  const auto xv = values_of(x.id);
  const auto sv = values_of(state.id);
  std::copy(xv.begin(), xv.end(), xh);
  std::copy_n(sv.begin(), d, xh + dx);
  kernels::active<Real>().gemv(values_of(weights.id).data(), 4 * d, dx + d, xh,
                               act);
  const auto bv = values_of(bias.id);
  for (std::size_t r = 0; r < 4 * d; ++r) {
    const Real z = act[r] + bv[r];
    act[r] = r < 3 * d ? Sigmoid(z) : std::tanh(z);
  }
  for (std::size_t j = 0; j < d; ++j) {
    const Real i = act[j], f = act[d + j], o = act[2 * d + j], g = act[3 * d + j];
    const Real c = f * sv[d + j] + i * g;
    tanh_c[j] = std::tanh(c);
    out.value[j] = o * tanh_c[j];
    out.value[d + j] = c;
  }
  return finish();
}

template <typename Real>
void Graph<Real>::backward(Var loss) {
  if (nodes_.empty()) throw ContractError("backward: tape is empty");
  if (consumed_) throw ContractError("backward: tape already consumed");
  const Node& ln = node(loss);
  if (ln.shape.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        ln.shape.to_string());
  }
  consumed_ = true;
  for (std::uint32_t id = 0; id <= loss.id; ++id) {
    Node& n = nodes_[id];
    if (n.requires_grad && n.op != OpKind::kParam) {
      n.grad.assign(n.shape.size(), Real(0));
    }
  }
  if (!ln.requires_grad) return;
  grad_sink(loss.id)[0] += Real(1);
  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (n.requires_grad && n.op != OpKind::kParam) backward_node(id);
  }
}

template <typename Real>
void Graph<Real>::backward_node(std::uint32_t id) {
  const auto& k = kernels::active<Real>();
  Node& n = nodes_[id];
  const std::span<const Real> dy = n.grad;
  const std::uint32_t a = n.in[0];
  const std::uint32_t b = n.in[1];
  switch (n.op) {
    case OpKind::kConstant:
    case OpKind::kParam:
      break;
    case OpKind::kMatmul: {
      const Shape sa = nodes_[a].shape;
      const Shape sb = nodes_[b].shape;
      const auto av = values_of(a);
      const auto bv = values_of(b);
      if (needs(a)) {
        auto da = grad_sink(a);
        if (sb.cols == 1) {
          k.ger_acc(da.data(), sa.rows, sa.cols, dy.data(), bv.data());
        } else {
          for (std::size_t i = 0; i < sa.rows; ++i) {
            for (std::size_t j = 0; j < sa.cols; ++j) {
              da[i * sa.cols + j] +=
                  k.dot(dy.data() + i * sb.cols, bv.data() + j * sb.cols, sb.cols);
            }
          }
        }
      }
      if (needs(b)) {
        auto db = grad_sink(b);
        if (sb.cols == 1) {
          k.gemv_t_acc(av.data(), sa.rows, sa.cols, dy.data(), db.data());
        } else {
          for (std::size_t i = 0; i < sa.rows; ++i) {
            for (std::size_t j = 0; j < sa.cols; ++j) {
              k.axpy(av[i * sa.cols + j], dy.data() + i * sb.cols,
                     db.data() + j * sb.cols, sb.cols);
            }
          }
        }
      }
      break;
    }
    case OpKind::kAdd:
      if (needs(a)) k.axpy(Real(1), dy.data(), grad_sink(a).data(), dy.size());
      if (needs(b)) k.axpy(Real(1), dy.data(), grad_sink(b).data(), dy.size());
      break;
    case OpKind::kSub:
      if (needs(a)) k.axpy(Real(1), dy.data(), grad_sink(a).data(), dy.size());
      if (needs(b)) k.axpy(Real(-1), dy.data(), grad_sink(b).data(), dy.size());
      break;
    case OpKind::kMul: {
      const auto av = values_of(a);
      const auto bv = values_of(b);
      if (needs(a)) {
        auto da = grad_sink(a);
        for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * bv[i];
      }
      if (needs(b)) {
        auto db = grad_sink(b);
        for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i] * av[i];
      }
      break;
    }
    case OpKind::kScale: {
      const auto xv = values_of(a);
      if (needs(a)) k.axpy(values_of(b)[0], dy.data(), grad_sink(a).data(), dy.size());
      if (needs(b)) grad_sink(b)[0] += k.dot(xv.data(), dy.data(), dy.size());
      break;
    }
    case OpKind::kAffine:
      k.axpy(n.a, dy.data(), grad_sink(a).data(), dy.size());
      break;
    case OpKind::kTanh: {
      auto da = grad_sink(a);
      for (std::size_t i = 0; i < dy.size(); ++i) {
        da[i] += dy[i] * (Real(1) - n.value[i] * n.value[i]);
      }
      break;
    }
    case OpKind::kSigmoid: {
      auto da = grad_sink(a);
      for (std::size_t i = 0; i < dy.size(); ++i) {
        da[i] += dy[i] * n.value[i] * (Real(1) - n.value[i]);
      }
      break;
    }
    case OpKind::kLog: {
      const auto xv = values_of(a);
      auto da = grad_sink(a);
      for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] / xv[i];
      break;
    }
    case OpKind::kConcat:
    case OpKind::kStack: {
      std::size_t offset = 0;
      for (std::uint32_t part : n.many) {
        const std::size_t len = nodes_[part].shape.size();
        if (needs(part)) {
          k.axpy(Real(1), dy.data() + offset, grad_sink(part).data(), len);
        }
        offset += len;
      }
      break;
    }
    case OpKind::kTranspose: {
      const Shape sx = nodes_[a].shape;
      auto da = grad_sink(a);
      for (std::size_t r = 0; r < sx.rows; ++r) {
        for (std::size_t c = 0; c < sx.cols; ++c) {
          da[r * sx.cols + c] += dy[c * sx.rows + r];
        }
      }
      break;
    }
    case OpKind::kSlice: {
      const std::size_t cols = nodes_[a].shape.cols;
      k.axpy(Real(1), dy.data(), grad_sink(a).data() + n.index * cols, dy.size());
      break;
    }
    case OpKind::kRow: {
      const std::size_t cols = nodes_[a].shape.cols;
      k.axpy(Real(1), dy.data(), grad_sink(a).data() + n.index * cols, cols);
      break;
    }
    case OpKind::kSoftmax: {
      const Real inner = k.dot(dy.data(), n.value.data(), dy.size());
      auto da = grad_sink(a);
      for (std::size_t i = 0; i < dy.size(); ++i) {
        da[i] += n.value[i] * (dy[i] - inner);
      }
      break;
    }
    case OpKind::kSum: {
      auto da = grad_sink(a);
      for (Real& g : da) g += dy[0];
      break;
    }
    case OpKind::kMean: {
      auto da = grad_sink(a);
      const Real share = dy[0] / static_cast<Real>(da.size());
      for (Real& g : da) g += share;
      break;
    }
    case OpKind::kPick:
      grad_sink(a)[n.index] += dy[0];
      break;
    case OpKind::kClampMin: {
      const auto xv = values_of(a);
      auto da = grad_sink(a);
      for (std::size_t i = 0; i < dy.size(); ++i) {
        if (xv[i] >= n.a) da[i] += dy[i];
      }
      break;
    }
    case OpKind::kStdPop: {
      const Real sd = n.value[0];
      if (sd > Real(0)) {
        const auto xv = values_of(a);
        auto da = grad_sink(a);
        const Real scale = dy[0] / (static_cast<Real>(xv.size()) * sd);
        for (std::size_t i = 0; i < xv.size(); ++i) da[i] += scale * (xv[i] - n.a);
      }
      break;
    }
    case OpKind::kDropout: {
      auto da = grad_sink(a);
      for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * n.cache[i];
      break;
    }
    case OpKind::kLstmCell: {
      const std::uint32_t state = n.in[1];
      const std::uint32_t weights = n.in[2];
      const std::uint32_t bias = n.in[3];
      const std::size_t d = n.shape.rows / 2;
      const std::size_t dx = nodes_[a].shape.rows;
      const Real* xh = n.cache.data();
      const Real* act = xh + dx + d;
      const Real* tanh_c = act + 4 * d;
      const auto sv = values_of(state);
      std::vector<Real> dz(4 * d);
      std::vector<Real> dc_prev(d);
      for (std::size_t j = 0; j < d; ++j) {
        const Real i = act[j], f = act[d + j], o = act[2 * d + j], g = act[3 * d + j];
        const Real dh = dy[j];
        const Real dc = dy[d + j] + dh * o * (Real(1) - tanh_c[j] * tanh_c[j]);
        dz[j] = dc * g * i * (Real(1) - i);
        dz[d + j] = dc * sv[d + j] * f * (Real(1) - f);
        dz[2 * d + j] = dh * tanh_c[j] * o * (Real(1) - o);
        dz[3 * d + j] = dc * i * (Real(1) - g * g);
        dc_prev[j] = dc * f;
      }
      if (needs(bias)) k.axpy(Real(1), dz.data(), grad_sink(bias).data(), 4 * d);
      if (needs(weights)) {
        k.ger_acc(grad_sink(weights).data(), 4 * d, dx + d, dz.data(), xh);
      }
      if (needs(a) || needs(state)) {
        std::vector<Real> dxh(dx + d, Real(0));
        k.gemv_t_acc(values_of(weights).data(), 4 * d, dx + d, dz.data(),
                     dxh.data());
        if (needs(a)) k.axpy(Real(1), dxh.data(), grad_sink(a).data(), dx);
        if (needs(state)) {
          auto ds = grad_sink(state);
          k.axpy(Real(1), dxh.data() + dx, ds.data(), d);
          k.axpy(Real(1), dc_prev.data(), ds.data() + d, d);
        }
      }
      break;
    }
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace spkcls
