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
#ifndef SPKCLS_ADAM_HPP_
#define SPKCLS_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "spkcls/params.hpp"

namespace spkcls {

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias-corrected moments. Moments are allocated on the first step
// and indexed like the ParamStore they were first applied to.
template <typename Real>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Applies one update from the grads currently stored in `params`. Grads are
  // left untouched; callers zero them. An empty store is a no-op.
  void step(ParamStore<Real>& params);

  std::int64_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<std::vector<Real>>& first_moments() const { return m_; }
  const std::vector<std::vector<Real>>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::vector<std::vector<Real>> m_;
  std::vector<std::vector<Real>> v_;
  std::int64_t t_ = 0;
};

}  // namespace spkcls

#endif  // SPKCLS_ADAM_HPP_
