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
#ifndef SPKCLS_TENSOR_HPP_
#define SPKCLS_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace spkcls {

// Rank-2 shape; column vectors are n x 1 and scalars 1 x 1.
struct Shape {
  std::size_t rows = 1;
  std::size_t cols = 1;

  constexpr std::size_t size() const { return rows * cols; }
  constexpr bool is_column() const { return cols == 1; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;

  std::string to_string() const;
};

template <typename Real>
struct Tensor {
  Shape shape;
  std::vector<Real> values;

  Tensor() = default;
  explicit Tensor(Shape s) : shape(s), values(s.size(), Real(0)) {}
  // Throws DimensionError when values.size() != shape.size().
  Tensor(Shape s, std::vector<Real> v);

  Real& at(std::size_t r, std::size_t c) { return values[r * shape.cols + c]; }
  Real at(std::size_t r, std::size_t c) const {
    return values[r * shape.cols + c];
  }
  std::span<Real> row(std::size_t r) {
    return {values.data() + r * shape.cols, shape.cols};
  }
  std::span<const Real> row(std::size_t r) const {
    return {values.data() + r * shape.cols, shape.cols};
  }
};

// A trainable tensor. grad always has the same length as value.values.
template <typename Real>
struct Parameter {
  std::string name;
  Tensor<Real> value;
  std::vector<Real> grad;
};

template <typename Real>
bool all_finite(std::span<const Real> values);

}  // namespace spkcls

#endif  // SPKCLS_TENSOR_HPP_
