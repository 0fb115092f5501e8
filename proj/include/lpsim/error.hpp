/* Copyright 2026 The lpsim Authors. All Rights Reserved.

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

#ifndef LPSIM_ERROR_HPP_
#define LPSIM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace lpsim {

// Caller broke a documented precondition (bad argument range, etc).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data failed validation: shapes, formats, malformed files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A running dot product left the range of its configured accumulator.
class AccumulatorOverflow : public DataError {
 public:
  using DataError::DataError;
};

// Unknown names, bad option combinations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lpsim

#endif  // LPSIM_ERROR_HPP_
