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
// Built with -mavx2 -mfma. Nothing here may run before the dispatcher has
// confirmed CPU support.

#include <immintrin.h>

#include "spkcls/kernels.hpp"

namespace spkcls::kernels::avx2 {
namespace {

inline double HorizontalSum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

inline float HorizontalSum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  return _mm_cvtss_f32(_mm_add_ss(sums, shuf));
}

double DotF64(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double result = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) result += a[i] * b[i];
  return result;
}

float DotF32(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8),
                           _mm256_loadu_ps(b + i + 8), acc1);
  }
  if (i + 8 <= n) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    i += 8;
  }
  float result = HorizontalSum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) result += a[i] * b[i];
  return result;
}

void AxpyF64(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void AxpyF32(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i),
                                            _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

template <typename Real>
Real Dot(const Real* a, const Real* b, std::size_t n) {
  if constexpr (sizeof(Real) == 8) {
    return DotF64(a, b, n);
  } else {
    return DotF32(a, b, n);
  }
}

template <typename Real>
void Axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
  if constexpr (sizeof(Real) == 8) {
    AxpyF64(alpha, x, y, n);
  } else {
    AxpyF32(alpha, x, y, n);
  }
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

}  // namespace spkcls::kernels::avx2
