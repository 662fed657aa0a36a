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
#include "spkcls/adam.hpp"

#include <cmath>

#include "spkcls/errors.hpp"

namespace spkcls {

template <typename Real>
void Adam<Real>::step(ParamStore<Real>& params) {
  if (params.size() == 0) return;
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].value.values.size(), Real(0));
      v_[i].assign(params[i].value.values.size(), Real(0));
    }
  }
  if (m_.size() != params.size()) {
    throw ContractError("adam: parameter set changed between steps");
  }
  ++t_;
  const double t = static_cast<double>(t_);
  const Real b1 = static_cast<Real>(config_.beta1);
  const Real b2 = static_cast<Real>(config_.beta2);
  const Real bc1 = static_cast<Real>(1.0 - std::pow(config_.beta1, t));
  const Real bc2 = static_cast<Real>(1.0 - std::pow(config_.beta2, t));
  const Real alpha = static_cast<Real>(config_.alpha);
  const Real eps = static_cast<Real>(config_.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    if (m.size() != p.value.values.size()) {
      throw DimensionError("adam: moment shape mismatch for " + p.name);
    }
    for (std::size_t j = 0; j < m.size(); ++j) {
      const Real g = p.grad[j];
      m[j] = b1 * m[j] + (Real(1) - b1) * g;
      v[j] = b2 * v[j] + (Real(1) - b2) * g * g;
      const Real m_hat = m[j] / bc1;
      const Real v_hat = v[j] / bc2;
      p.value.values[j] -= alpha * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace spkcls
