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
#include <random>
#include <vector>

#include "doctest.h"
#include "spkcls/errors.hpp"
#include "spkcls/kernels.hpp"

namespace spkcls::kernels {
namespace {

template <typename Real>
std::vector<Real> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Real> v(n);
  for (auto& x : v) x = static_cast<Real>(u(rng));
  return v;
}

// Long-double reference; a different summation order than either kernel.
template <typename Real>
long double ref_dot(const std::vector<Real>& a, const std::vector<Real>& b) {
  long double s = 0;
  for (std::size_t i = a.size(); i-- > 0;) s += static_cast<long double>(a[i]) * b[i];
  return s;
}

template <typename Real>
constexpr double tol() {
  return sizeof(Real) == 4 ? 2e-5 : 1e-13;
}

template <typename Real>
void check_table(const KernelTable<Real>& k) {
  std::mt19937_64 rng(42);
  for (std::size_t n = 0; n <= 70; ++n) {
    CAPTURE(n);
    auto a = random_vec<Real>(rng, n);
    auto b = random_vec<Real>(rng, n);
    CHECK(std::abs(static_cast<double>(k.dot(a.data(), b.data(), n) - ref_dot(a, b))) <=
          tol<Real>() * (1 + n));

    auto y = b;
    k.axpy(Real(0.5), a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(static_cast<double>(y[i]) - (b[i] + 0.5L * a[i])) <= tol<Real>());
    }
  }
  for (std::size_t rows : {1u, 3u, 8u, 17u}) {
    for (std::size_t cols : {1u, 4u, 9u, 33u}) {
      CAPTURE(rows);
      CAPTURE(cols);
      auto w = random_vec<Real>(rng, rows * cols);
      auto x = random_vec<Real>(rng, cols);
      auto z = random_vec<Real>(rng, rows);
      std::vector<Real> y(rows);
      k.gemv(w.data(), rows, cols, x.data(), y.data());
      for (std::size_t r = 0; r < rows; ++r) {
        long double s = 0;
        for (std::size_t c = 0; c < cols; ++c) s += static_cast<long double>(w[r * cols + c]) * x[c];
        CHECK(std::abs(static_cast<double>(y[r] - s)) <= tol<Real>() * (1 + cols));
      }
      std::vector<Real> out(cols, Real(1));
      k.gemv_t_acc(w.data(), rows, cols, z.data(), out.data());
      for (std::size_t c = 0; c < cols; ++c) {
        long double s = 1;
        for (std::size_t r = 0; r < rows; ++r) s += static_cast<long double>(w[r * cols + c]) * z[r];
        CHECK(std::abs(static_cast<double>(out[c] - s)) <= tol<Real>() * (1 + rows));
      }
      auto w2 = w;
      k.ger_acc(w2.data(), rows, cols, z.data(), x.data());
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          long double e = w[r * cols + c] + static_cast<long double>(z[r]) * x[c];
          CHECK(std::abs(static_cast<double>(w2[r * cols + c] - e)) <= tol<Real>());
        }
      }
    }
  }
}

template <typename Real>
void check_equivalent() {
  if (!isa_supported(Isa::kAvx2)) {
    MESSAGE("AVX2 not available; only the scalar table is exercised");
    return;
  }
  const auto& s = table<Real>(Isa::kScalar);
  const auto& v = table<Real>(Isa::kAvx2);
  std::mt19937_64 rng(7);
  for (std::size_t rows = 1; rows <= 20; rows += 3) {
    for (std::size_t cols = 1; cols <= 41; cols += 4) {
      auto w = random_vec<Real>(rng, rows * cols);
      auto x = random_vec<Real>(rng, cols);
      auto z = random_vec<Real>(rng, rows);
      std::vector<Real> ys(rows), yv(rows);
      s.gemv(w.data(), rows, cols, x.data(), ys.data());
      v.gemv(w.data(), rows, cols, x.data(), yv.data());
      for (std::size_t r = 0; r < rows; ++r) CHECK(std::abs(ys[r] - yv[r]) <= tol<Real>() * (1 + cols));
      std::vector<Real> os(cols), ov(cols);
      s.gemv_t_acc(w.data(), rows, cols, z.data(), os.data());
      v.gemv_t_acc(w.data(), rows, cols, z.data(), ov.data());
      for (std::size_t c = 0; c < cols; ++c) CHECK(std::abs(os[c] - ov[c]) <= tol<Real>() * (1 + rows));
      auto ws = w, wv = w;
      s.ger_acc(ws.data(), rows, cols, z.data(), x.data());
      v.ger_acc(wv.data(), rows, cols, z.data(), x.data());
      for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(ws[i] - wv[i]) <= tol<Real>());
      CHECK(std::abs(s.dot(x.data(), x.data(), cols) - v.dot(x.data(), x.data(), cols)) <=
            tol<Real>() * (1 + cols));
    }
  }
}

TEST_CASE("scalar kernels match a long-double reference") {
  check_table(table<float>(Isa::kScalar));
  check_table(table<double>(Isa::kScalar));
}

TEST_CASE("avx2 kernels match a long-double reference") {
  if (!isa_supported(Isa::kAvx2)) return;
  check_table(table<float>(Isa::kAvx2));
  check_table(table<double>(Isa::kAvx2));
}

TEST_CASE("scalar and avx2 kernels agree") {
  check_equivalent<float>();
  check_equivalent<double>();
}

TEST_CASE("isa selection") {
  const Isa before = active_isa();
  CHECK(isa_supported(Isa::kScalar));
  set_active_isa(Isa::kScalar);
  CHECK(active_isa() == Isa::kScalar);
  CHECK(&active<double>() == &table<double>(Isa::kScalar));
  if (!isa_supported(Isa::kAvx2)) CHECK_THROWS_AS(set_active_isa(Isa::kAvx2), ContractError);
  set_active_isa(before);
  CHECK(isa_name(Isa::kScalar) == "scalar");
  CHECK(isa_name(Isa::kAvx2) == "avx2");
}

}  // namespace
}  // namespace spkcls::kernels
