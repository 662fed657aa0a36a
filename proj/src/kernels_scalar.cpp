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
#include "spkcls/kernels.hpp"

namespace spkcls::kernels::scalar {
namespace {

template <typename Real>
Real Dot(const Real* a, const Real* b, std::size_t n) {
  Real acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename Real>
void Axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename Real>
void Gemv(const Real* w, std::size_t rows, std::size_t cols, const Real* x,
          Real* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = Dot(w + r * cols, x, cols);
}

template <typename Real>
void GemvTransAcc(const Real* w, std::size_t rows, std::size_t cols,
                  const Real* z, Real* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (z[r] != Real(0)) Axpy(z[r], w + r * cols, out, cols);
  }
}

template <typename Real>
void GerAcc(Real* w, std::size_t rows, std::size_t cols, const Real* z,
            const Real* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (z[r] != Real(0)) Axpy(z[r], x, w + r * cols, cols);
  }
}

}  // namespace

template <typename Real>
const KernelTable<Real>& table() {
  static const KernelTable<Real> kTable{&Dot<Real>, &Axpy<Real>, &Gemv<Real>,
                                        &GemvTransAcc<Real>, &GerAcc<Real>};
  return kTable;
}

template const KernelTable<float>& table<float>();
template const KernelTable<double>& table<double>();

}  // namespace spkcls::kernels::scalar
