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
#include "spkcls/tensor.hpp"

#include <cmath>

#include "spkcls/errors.hpp"

namespace spkcls {

std::string Shape::to_string() const {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

template <typename Real>
Tensor<Real>::Tensor(Shape s, std::vector<Real> v)
    : shape(s), values(std::move(v)) {
  if (values.size() != shape.size()) {
    throw DimensionError("tensor of shape " + shape.to_string() + " given " +
                         std::to_string(values.size()) + " values");
  }
}

template <typename Real>
bool all_finite(std::span<const Real> values) {
  for (Real v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template struct Tensor<float>;
template struct Tensor<double>;
template bool all_finite<float>(std::span<const float>);
template bool all_finite<double>(std::span<const double>);

}  // namespace spkcls
