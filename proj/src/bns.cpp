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

#include "lpsim/bns.hpp"

#include <cmath>
#include <string>

#include "lpsim/error.hpp"

namespace lpsim::bns {

BnsFused fuse(const BnsRaw& raw) {
  BnsFused out;
  out.gamma.reserve(raw.size());
  out.beta.reserve(raw.size());
  for (std::size_t f = 0; f < raw.size(); ++f) {
    const BnsFeature& p = raw[f];
    if (p.bn_divisor == 0.0 || !std::isfinite(p.bn_divisor)) {
      throw DataError("feature " + std::to_string(f) + ": batch-norm divisor must be nonzero");
    }
    if (!(p.alpha > 0.0)) {
      throw ContractViolation("feature " + std::to_string(f) + ": alpha must be positive");
    }
    const double ratio = p.scale / p.bn_divisor;
    out.gamma.push_back(ratio * p.alpha);
    out.beta.push_back(p.shift - ratio * p.bn_shift);
    if (!std::isfinite(out.gamma.back()) || !std::isfinite(out.beta.back())) {
      throw DataError("feature " + std::to_string(f) + ": fused parameters are not finite");
    }
  }
  return out;
}

BnsFused fold_input_scale(const BnsFused& fused, ActFormat input_format) {
  if (input_format.bipolar()) return fused;
  BnsFused out = fused;
  const double levels = input_format.levels();
  for (double& g : out.gamma) g /= levels;
  return out;
}

float apply(std::int64_t acc, const BnsFused& fused, std::size_t feature) {
  if (feature >= fused.size()) {
    throw ContractViolation("feature " + std::to_string(feature) + " out of range (" +
                            std::to_string(fused.size()) + " features)");
  }
  const float gamma = static_cast<float>(fused.gamma[feature]);
  const float beta = static_cast<float>(fused.beta[feature]);
  return gamma * static_cast<float>(acc) + beta;
}

double apply_unfused(double acc, const BnsFeature& p) {
  return p.scale * ((p.alpha * acc - p.bn_shift) / p.bn_divisor) + p.shift;
}

}  // namespace lpsim::bns
