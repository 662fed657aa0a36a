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

#include <atomic>
#include <cstdlib>
#include <string>

#include "spkcls/errors.hpp"

namespace spkcls::kernels {
namespace {

Isa InitialIsa() {
  if (const char* env = std::getenv("SPKCLS_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && isa_supported(Isa::kAvx2)) return Isa::kAvx2;
  }
  return detect_isa();
}

std::atomic<Isa>& ActiveSlot() {
  static std::atomic<Isa> slot{InitialIsa()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(SPKCLS_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() {
  return isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

Isa active_isa() { return ActiveSlot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw ContractError("kernel ISA '" + std::string(isa_name(isa)) +
                        "' is not supported on this machine");
  }
  ActiveSlot().store(isa, std::memory_order_relaxed);
}

template <typename Real>
const KernelTable<Real>& table(Isa isa) {
#if defined(SPKCLS_HAVE_AVX2)
  if (isa == Isa::kAvx2) {
    if (!isa_supported(isa)) {
      throw ContractError("avx2 kernels requested but not supported");
    }
    return avx2::table<Real>();
  }
#else
  if (isa == Isa::kAvx2) {
    throw ContractError("avx2 kernels not built for this target");
  }
#endif
  return scalar::table<Real>();
}

template <typename Real>
const KernelTable<Real>& active() {
  // active_isa() only ever holds a supported ISA.
#if defined(SPKCLS_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::table<Real>();
#endif
  return scalar::table<Real>();
}

template const KernelTable<float>& table<float>(Isa);
template const KernelTable<double>& table<double>(Isa);
template const KernelTable<float>& active<float>();
template const KernelTable<double>& active<double>();

}  // namespace spkcls::kernels
