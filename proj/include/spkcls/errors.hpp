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
#ifndef SPKCLS_ERRORS_HPP_
#define SPKCLS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace spkcls {

// A caller violated a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Operand shapes are not conformable for an operation.
class DimensionError : public ContractError {
 public:
  using ContractError::ContractError;
};

// A NaN or Inf was produced while finite checking was enabled.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spkcls

#endif  // SPKCLS_ERRORS_HPP_
