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

#ifndef LPSIM_NUMERICS_HPP_
#define LPSIM_NUMERICS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lpsim {

/// Unsigned activation code format.
///
/// For bits >= 2 a code k in [0, L] with L = 2^bits - 1 stands for the value
/// k / L in [0, 1]. One-bit activations are bipolar: code 0 is -1, code 1 is +1.
class ActFormat {
 public:
  constexpr ActFormat() = default;
  explicit ActFormat(int bits);

  constexpr int bits() const { return bits_; }
  constexpr int levels() const { return (1 << bits_) - 1; }
  constexpr bool bipolar() const { return bits_ == 1; }
  constexpr bool contains(std::int64_t code) const { return code >= 0 && code <= levels(); }

  friend constexpr bool operator==(ActFormat, ActFormat) = default;

 private:
  int bits_ = 8;
};

enum class WeightKind { kFp32, kSignedInt, kTernary, kBinary };

/// Storage convention for filter codes.
///
/// Signed integers are two's complement values of `bits` width. Ternary codes
/// are -1/0/+1. Binary codes are stored as 0/1 and mean -1/+1.
class WeightFormat {
 public:
  static WeightFormat fp32() { return WeightFormat(WeightKind::kFp32, 32); }
  static WeightFormat signed_int(int bits);
  static WeightFormat ternary() { return WeightFormat(WeightKind::kTernary, 2); }
  static WeightFormat binary() { return WeightFormat(WeightKind::kBinary, 1); }

  WeightKind kind() const { return kind_; }
  /// Bit width used for GOP-bits and accumulator sizing.
  int effective_bits() const { return bits_; }

  bool is_integer() const { return kind_ != WeightKind::kFp32; }
  std::int32_t min_code() const;
  std::int32_t max_code() const;
  bool contains(std::int32_t code) const { return code >= min_code() && code <= max_code(); }
  /// Integer weight value a stored code multiplies by.
  std::int32_t decode(std::int32_t code) const {
    return kind_ == WeightKind::kBinary ? 2 * code - 1 : code;
  }

  /// "8", "T", "B" or "FP32"; the short form used in PE names.
  std::string short_name() const;
  /// "8-bit", "Ternary", "Binary", "FP32".
  std::string long_name() const;

  friend bool operator==(const WeightFormat&, const WeightFormat&) = default;

 private:
  WeightFormat(WeightKind kind, int bits) : kind_(kind), bits_(bits) {}

  WeightKind kind_ = WeightKind::kFp32;
  int bits_ = 32;
};

/// Clip to [0, 1], then round half up onto the grid {0, 1/L, ..., 1}.
/// Requires fmt.bits() >= 2.
double quantize_act_ref(double x, ActFormat fmt);

/// Integer code form of quantize_act_ref for a post-ReLU value x >= 0.
/// Negative or NaN input throws ContractViolation.
std::int32_t quantize_act_code(double x, ActFormat fmt);

/// Sign threshold used for 1-bit activations: code 1 iff x > 0.
std::int32_t quantize_act_bipolar(double x);

/// ReLU followed by the quantizer appropriate for fmt (bipolar for 1 bit).
std::int32_t quantize_activation(double x, ActFormat fmt);

/// Real value of a stored activation code. Out-of-range codes throw.
double decode_act(std::int64_t code, ActFormat fmt);

/// Integer value a code contributes to a PE dot product: the code itself for
/// unsigned formats, -1/+1 for bipolar.
inline std::int32_t act_operand(std::int32_t code, ActFormat fmt) {
  return fmt.bipolar() ? 2 * code - 1 : code;
}

struct Shape4 {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

std::string to_string(const Shape4& s);

/// Integer-coded activation tensor in NCHW order.
class QTensor {
 public:
  QTensor() = default;
  QTensor(Shape4 shape, ActFormat format);
  QTensor(Shape4 shape, ActFormat format, std::vector<std::int32_t> codes);

  const Shape4& shape() const { return shape_; }
  ActFormat format() const { return format_; }
  std::span<const std::int32_t> codes() const { return codes_; }
  std::span<std::int32_t> mutable_codes() { return codes_; }

  std::size_t index(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  std::int32_t at(int n, int c, int y, int x) const { return codes_[index(n, c, y, x)]; }
  void set(int n, int c, int y, int x, std::int32_t code) { codes_[index(n, c, y, x)] = code; }

  /// Throws DataError if any code is outside the format range.
  void validate() const;

  friend bool operator==(const QTensor&, const QTensor&) = default;

 private:
  Shape4 shape_{};
  ActFormat format_{};
  std::vector<std::int32_t> codes_;
};

/// Filters of one conv/fc layer in (out, in, kh, kw) order plus a positive
/// scale per output feature.
struct QuantizedFilterBank {
  WeightFormat format = WeightFormat::ternary();
  int out_features = 0;
  int in_channels = 0;  // per group
  int kernel_h = 1;
  int kernel_w = 1;
  std::vector<std::int8_t> codes;
  std::vector<double> alpha;

  std::size_t filter_size() const {
    return static_cast<std::size_t>(in_channels) * kernel_h * kernel_w;
  }
  std::span<const std::int8_t> filter(int f) const {
    return std::span<const std::int8_t>(codes).subspan(f * filter_size(), filter_size());
  }
  /// Throws DataError on size mismatch, out-of-format codes or alpha <= 0.
  void validate() const;
};

struct FeatureQuantization {
  std::vector<std::int8_t> codes;
  double alpha = 0.0;
};

/// Ternary approximation alpha * codes of one real filter.
///
/// Codes start from the threshold 0.7 * mean|w| and alpha is the mean |w| of
/// the selected entries; codes and alpha are then alternately re-fitted until
/// the codes are the exact minimiser of ||w - alpha * c||^2 at the returned
/// alpha. An all-zero filter throws DataError.
FeatureQuantization quantize_feature_ternary(std::span<const double> weights);

/// Binary approximation: alpha = mean|w|, code 1 for w >= 0, else 0.
FeatureQuantization quantize_feature_binary(std::span<const double> weights);

/// Quantizes a real (out, in, kh, kw) filter array feature by feature.
QuantizedFilterBank quantize_weights_ternary(std::span<const double> weights, int out_features,
                                             int in_channels, int kernel_h, int kernel_w);
QuantizedFilterBank quantize_weights_binary(std::span<const double> weights, int out_features,
                                            int in_channels, int kernel_h, int kernel_w);

}  // namespace lpsim

#endif  // LPSIM_NUMERICS_HPP_
