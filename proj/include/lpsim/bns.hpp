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

#ifndef LPSIM_BNS_HPP_
#define LPSIM_BNS_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lpsim/numerics.hpp"

namespace lpsim::bns {

/// Unmerged per-feature parameters of batch norm, the learned scale layer
/// and the weight scale alpha.
struct BnsFeature {
  double bn_shift = 0.0;    // w: subtracted statistic (mean-like)
  double bn_divisor = 1.0;  // x: divisor (std-like)
  double scale = 1.0;       // y
  double shift = 0.0;       // z
  double alpha = 1.0;       // weight scale, > 0
};

using BnsRaw = std::vector<BnsFeature>;

/// One multiply-add per feature: gamma * acc + beta.
struct BnsFused {
  std::vector<double> gamma;
  std::vector<double> beta;

  std::size_t size() const { return gamma.size(); }
};

/// gamma = y / x * alpha, beta = z - y / x * w.
/// A zero divisor throws DataError; alpha <= 0 throws ContractViolation.
BnsFused fuse(const BnsRaw& raw);

/// Hides the previous layer's 1/L code scale in gamma so the PE array can
/// consume raw codes. Bipolar inputs already decode to -1/+1 and pass through.
BnsFused fold_input_scale(const BnsFused& fused, ActFormat input_format);

/// gamma_f * acc + beta_f in single precision.
float apply(std::int64_t acc, const BnsFused& fused, std::size_t feature);

/// Unfused form y * ((alpha * acc - w) / x) + z, in double precision.
double apply_unfused(double acc, const BnsFeature& p);

}  // namespace lpsim::bns

#endif  // LPSIM_BNS_HPP_
