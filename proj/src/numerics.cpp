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

#include "lpsim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lpsim/error.hpp"

namespace lpsim {

ActFormat::ActFormat(int bits) : bits_(bits) {
  if (bits < 1 || bits > 8) {
    throw ContractViolation("activation width must be 1..8 bits, got " + std::to_string(bits));
  }
}

WeightFormat WeightFormat::signed_int(int bits) {
  if (bits < 2 || bits > 8) {
    throw ContractViolation("signed weight width must be 2..8 bits, got " + std::to_string(bits));
  }
  return WeightFormat(WeightKind::kSignedInt, bits);
}

std::int32_t WeightFormat::min_code() const {
  switch (kind_) {
    case WeightKind::kSignedInt: return -(1 << (bits_ - 1));
    case WeightKind::kTernary: return -1;
    case WeightKind::kBinary: return 0;
    case WeightKind::kFp32: break;
  }
  throw ContractViolation("fp32 weights have no integer code range");
}

std::int32_t WeightFormat::max_code() const {
  switch (kind_) {
    case WeightKind::kSignedInt: return (1 << (bits_ - 1)) - 1;
    case WeightKind::kTernary: return 1;
    case WeightKind::kBinary: return 1;
    case WeightKind::kFp32: break;
  }
  throw ContractViolation("fp32 weights have no integer code range");
}

std::string WeightFormat::short_name() const {
  switch (kind_) {
    case WeightKind::kSignedInt: return std::to_string(bits_);
    case WeightKind::kTernary: return "T";
    case WeightKind::kBinary: return "B";
    case WeightKind::kFp32: break;
  }
  return "FP32";
}

std::string WeightFormat::long_name() const {
  switch (kind_) {
    case WeightKind::kSignedInt: return std::to_string(bits_) + "-bit";
    case WeightKind::kTernary: return "Ternary";
    case WeightKind::kBinary: return "Binary";
    case WeightKind::kFp32: break;
  }
  return "FP32";
}

double quantize_act_ref(double x, ActFormat fmt) {
  if (fmt.bipolar()) throw ContractViolation("quantize_act_ref needs bits >= 2");
  const double levels = fmt.levels();
  return std::floor(std::min(std::max(0.0, x), 1.0) * levels + 0.5) / levels;
}

std::int32_t quantize_act_code(double x, ActFormat fmt) {
  if (fmt.bipolar()) throw ContractViolation("quantize_act_code needs bits >= 2");
  if (!(x >= 0.0)) throw ContractViolation("quantize_act_code expects a post-ReLU value x >= 0");
  return static_cast<std::int32_t>(std::floor(std::min(1.0, x) * fmt.levels() + 0.5));
}

std::int32_t quantize_act_bipolar(double x) { return x > 0.0 ? 1 : 0; }

std::int32_t quantize_activation(double x, ActFormat fmt) {
  if (std::isnan(x)) throw DataError("NaN activation");
  if (fmt.bipolar()) return quantize_act_bipolar(x);
  return quantize_act_code(std::max(0.0, x), fmt);
}

double decode_act(std::int64_t code, ActFormat fmt) {
  if (!fmt.contains(code)) {
    throw DataError("activation code " + std::to_string(code) + " out of range for " +
                    std::to_string(fmt.bits()) + "-bit format");
  }
  if (fmt.bipolar()) return code == 0 ? -1.0 : 1.0;
  return static_cast<double>(code) / fmt.levels();
}

std::string to_string(const Shape4& s) {
  return std::to_string(s.n) + "x" + std::to_string(s.c) + "x" + std::to_string(s.h) + "x" +
         std::to_string(s.w);
}

QTensor::QTensor(Shape4 shape, ActFormat format)
    : shape_(shape), format_(format), codes_(shape.size(), 0) {}

QTensor::QTensor(Shape4 shape, ActFormat format, std::vector<std::int32_t> codes)
    : shape_(shape), format_(format), codes_(std::move(codes)) {
  if (codes_.size() != shape_.size()) {
    throw DataError("tensor of shape " + to_string(shape_) + " needs " +
                    std::to_string(shape_.size()) + " codes, got " +
                    std::to_string(codes_.size()));
  }
  validate();
}

void QTensor::validate() const {
  if (shape_.n <= 0 || shape_.c <= 0 || shape_.h <= 0 || shape_.w <= 0) {
    throw DataError("tensor dims must be positive, got " + to_string(shape_));
  }
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (!format_.contains(codes_[i])) {
      throw DataError("code " + std::to_string(codes_[i]) + " at element " + std::to_string(i) +
                      " outside " + std::to_string(format_.bits()) + "-bit range");
    }
  }
}

void QuantizedFilterBank::validate() const {
  if (!format.is_integer()) throw DataError("filter bank must use an integer weight format");
  if (out_features <= 0 || in_channels <= 0 || kernel_h <= 0 || kernel_w <= 0) {
    throw DataError("filter bank dims must be positive");
  }
  if (codes.size() != filter_size() * out_features) {
    throw DataError("filter bank holds " + std::to_string(codes.size()) + " codes, expected " +
                    std::to_string(filter_size() * out_features));
  }
  if (alpha.size() != static_cast<std::size_t>(out_features)) {
    throw DataError("filter bank needs one alpha per output feature");
  }
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DataError("alpha must be positive and finite");
  }
  for (std::int8_t c : codes) {
    if (!format.contains(c)) {
      throw DataError("filter code " + std::to_string(c) + " outside weight format range");
    }
  }
}

namespace {

double mean_abs(std::span<const double> w) {
  double sum = 0.0;
  for (double v : w) sum += std::abs(v);
  return w.empty() ? 0.0 : sum / static_cast<double>(w.size());
}

std::int8_t sign_code(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

void check_filter(std::span<const double> weights) {
  if (weights.empty()) throw DataError("empty filter");
  for (double v : weights) {
    if (!std::isfinite(v)) throw DataError("non-finite filter weight");
  }
}

}  // namespace

FeatureQuantization quantize_feature_ternary(std::span<const double> weights) {
  check_filter(weights);
  const double threshold = 0.7 * mean_abs(weights);
  if (!(threshold > 0.0)) throw DataError("all-zero filter has no ternary scale");

  FeatureQuantization q;
  q.codes.resize(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    q.codes[i] = std::abs(weights[i]) > threshold ? sign_code(weights[i]) : 0;
  }

  // Alternate alpha <- mean|w| over the support, codes <- argmin at alpha.
  // Each step lowers ||w - alpha*c||^2, so this stops at a fixed point.
  for (int iter = 0; iter < 64; ++iter) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (q.codes[i] != 0) {
        sum += std::abs(weights[i]);
        ++count;
      }
    }
    q.alpha = sum / count;
    bool changed = false;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const std::int8_t c = std::abs(weights[i]) > 0.5 * q.alpha ? sign_code(weights[i]) : 0;
      changed |= c != q.codes[i];
      q.codes[i] = c;
    }
    if (!changed) break;
  }
  return q;
}

FeatureQuantization quantize_feature_binary(std::span<const double> weights) {
  check_filter(weights);
  FeatureQuantization q;
  q.alpha = mean_abs(weights);
  if (!(q.alpha > 0.0)) throw DataError("all-zero filter has no binary scale");
  q.codes.resize(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) q.codes[i] = weights[i] >= 0.0 ? 1 : 0;
  return q;
}

namespace {

template <typename Fn>
QuantizedFilterBank quantize_bank(std::span<const double> weights, int out_features,
                                  int in_channels, int kernel_h, int kernel_w,
                                  WeightFormat format, Fn quantize_one) {
  QuantizedFilterBank bank;
  bank.format = format;
  bank.out_features = out_features;
  bank.in_channels = in_channels;
  bank.kernel_h = kernel_h;
  bank.kernel_w = kernel_w;
  const std::size_t per = bank.filter_size();
  if (out_features <= 0 || per == 0 || weights.size() != per * out_features) {
    throw DataError("weight array size does not match filter shape");
  }
  bank.codes.reserve(weights.size());
  for (int f = 0; f < out_features; ++f) {
    FeatureQuantization q = quantize_one(weights.subspan(f * per, per));
    bank.codes.insert(bank.codes.end(), q.codes.begin(), q.codes.end());
    bank.alpha.push_back(q.alpha);
  }
  return bank;
}

}  // namespace

QuantizedFilterBank quantize_weights_ternary(std::span<const double> weights, int out_features,
                                             int in_channels, int kernel_h, int kernel_w) {
  return quantize_bank(weights, out_features, in_channels, kernel_h, kernel_w,
                       WeightFormat::ternary(), quantize_feature_ternary);
}

QuantizedFilterBank quantize_weights_binary(std::span<const double> weights, int out_features,
                                            int in_channels, int kernel_h, int kernel_w) {
  return quantize_bank(weights, out_features, in_channels, kernel_h, kernel_w,
                       WeightFormat::binary(), quantize_feature_binary);
}

}  // namespace lpsim
