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
#ifndef SPKCLS_PARAMS_HPP_
#define SPKCLS_PARAMS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "spkcls/tensor.hpp"

namespace spkcls {

// Named parameters in insertion order. Addresses are stable for the lifetime
// of the store, so graphs and optimizers may hold Parameter pointers.
template <typename Real>
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore& other);
  ParamStore& operator=(const ParamStore& other);
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  // Throws ContractError on a duplicate name.
  Parameter<Real>& add(std::string name, Shape shape);
  Parameter<Real>& get(std::string_view name);
  const Parameter<Real>& get(std::string_view name) const;
  Parameter<Real>* find(std::string_view name);
  const Parameter<Real>* find(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  Parameter<Real>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<Real>& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();
  // Copies values (not grads) from a store with identical names and shapes.
  void copy_values_from(const ParamStore& other);

 private:
  std::vector<std::unique_ptr<Parameter<Real>>> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

template <typename Real>
void init_uniform(Parameter<Real>& p, Real bound, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Checkpoint container.
//
//   spkcls-checkpoint 1
//   precision f64|f32
//   meta <key> <value...>
//   param <name> <rows> <cols>
//   <hex-float values, space separated, one line>
//   end
//
// Values are written as C99 hex floats in the stored precision, so a
// checkpoint reloads bit-exactly.
// ---------------------------------------------------------------------------

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  std::string precision = "f64";
  std::map<std::string, std::string> meta;
  // Stored widened to double; f32 values convert exactly.
  std::vector<std::pair<std::string, Tensor<double>>> tensors;

  const Tensor<double>* find(std::string_view name) const;
};

template <typename Real>
Checkpoint make_checkpoint(const ParamStore<Real>& store,
                           std::map<std::string, std::string> meta);

// Copies every tensor of the checkpoint into the same-named parameter.
// Throws FormatError on a missing name or a shape mismatch.
template <typename Real>
void load_into(const Checkpoint& ckpt, ParamStore<Real>& store);

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spkcls

#endif  // SPKCLS_PARAMS_HPP_
