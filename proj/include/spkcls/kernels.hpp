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
#ifndef SPKCLS_KERNELS_HPP_
#define SPKCLS_KERNELS_HPP_

// Dense inner loops shared by every model op. Each instruction set provides a
// full table; the active table is picked once at startup from CPUID and may be
// overridden with SPKCLS_ISA=scalar|avx2 or set_active_isa().
//
// All matrices are row-major. Summation order inside a table is fixed, so a
// given table is bitwise deterministic; different tables agree only up to
// rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace spkcls::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

template <typename Real>
struct KernelTable {
  // sum_i a[i] * b[i]
  Real (*dot)(const Real* a, const Real* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(Real alpha, const Real* x, Real* y, std::size_t n);
  // y = W x, W is rows x cols
  void (*gemv)(const Real* w, std::size_t rows, std::size_t cols,
               const Real* x, Real* y);
  // out += W^T z
  void (*gemv_t_acc)(const Real* w, std::size_t rows, std::size_t cols,
                     const Real* z, Real* out);
  // W += z x^T
  void (*ger_acc)(Real* w, std::size_t rows, std::size_t cols, const Real* z,
                  const Real* x);
};

bool isa_supported(Isa isa);
Isa detect_isa();
Isa active_isa();
// Throws ContractError if the ISA is not available on this machine/build.
void set_active_isa(Isa isa);

template <typename Real>
const KernelTable<Real>& table(Isa isa);

template <typename Real>
const KernelTable<Real>& active();

namespace scalar {
template <typename Real>
const KernelTable<Real>& table();
}  // namespace scalar

namespace avx2 {
// Defined only when built for x86-64.
template <typename Real>
const KernelTable<Real>& table();
}  // namespace avx2

template <typename Real>
Real dot(std::span<const Real> a, std::span<const Real> b) {
  return active<Real>().dot(a.data(), b.data(), a.size());
}

template <typename Real>
void axpy(Real alpha, std::span<const Real> x, std::span<Real> y) {
  active<Real>().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace spkcls::kernels

#endif  // SPKCLS_KERNELS_HPP_
