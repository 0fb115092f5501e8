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

#ifndef LPSIM_PE_HPP_
#define LPSIM_PE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpsim/numerics.hpp"

namespace lpsim::pe {

/// Signed accumulator width that holds any dot product of `dot_size`
/// products of an unsigned act_bits value and a weight_bits signed value.
int acc_width(int act_bits, int weight_bits_effective, std::int64_t dot_size);

/// Running sum that refuses to leave the signed range of its width.
class DotAccumulator {
 public:
  /// width_bits in 2..63.
  explicit DotAccumulator(int width_bits);

  void add(std::int64_t v);
  std::int64_t value() const { return value_; }
  int width_bits() const { return width_bits_; }
  static bool fits(std::int64_t v, int width_bits);

 private:
  std::int64_t value_ = 0;
  std::int64_t limit_;  // 2^(width-1)
  int width_bits_;
};

// All dot products take activation operands as integers (unsigned codes, or
// -1/+1 for bipolar activations) and weights as stored codes. acc_bits > 0
// checks every partial sum against that accumulator width and throws
// AccumulatorOverflow; 0 leaves the sum unchecked in 64 bits.

/// Plain multiply-accumulate over integer weight values.
std::int64_t dot_ref(std::span<const std::int32_t> acts, std::span<const std::int8_t> weights,
                     int acc_bits = 0);

/// Binary weights stored as 0/1: each product is a sign flip and a mux.
std::int64_t dot_binary_mux(std::span<const std::int32_t> acts,
                            std::span<const std::int8_t> weight_codes, int acc_bits = 0);

/// Ternary weights: mux between -a, 0, +a.
std::int64_t dot_ternary_mux(std::span<const std::int32_t> acts,
                             std::span<const std::int8_t> weight_codes, int acc_bits = 0);

/// 1-bit activation and weight codes (0 = -1, 1 = +1): 2 * popcount(xnor) - N.
std::int64_t dot_xnor_popcount(std::span<const std::int32_t> act_codes,
                               std::span<const std::int8_t> weight_codes, int acc_bits = 0);

// Packed DSP operand for 2-bit activations.
//
//   bit  17 16 | 15 14 13 12 | 11 10  9  8 |  7  6  5  4 |  3  2  1  0
//        pad   | g  g  D  D  | g  g  C  C  | g  g  B  B  | g  g  A  A
//
// Lane i sits at bits [4i, 4i+1]; bits [4i+2, 4i+3] are zero guard bits that
// absorb the sign extension of lane i's product. Multiplying the word by one
// small signed weight leaves each lane product in a 4-bit signed field.
inline constexpr int kDspLanes = 4;
inline constexpr int kDspLaneStride = 4;
inline constexpr int kDspOperandBits = 18;

struct PackedOperand {
  std::uint32_t word = 0;
  friend bool operator==(PackedOperand, PackedOperand) = default;
};

using LaneCodes = std::array<std::int32_t, kDspLanes>;

/// Weight range a packed multiply accepts: ternary {-1,0,1} or signed 2-bit {-2..1}.
enum class DspWeightMode { kTernary, kSigned2 };

PackedOperand pack_dsp_operand(const LaneCodes& lanes);
LaneCodes unpack_dsp_operand(PackedOperand packed);

/// One 18x18 signed multiply of the packed word by a sign-extended weight,
/// followed by lowest-first lane extraction with borrow correction.
LaneCodes dsp_packed_multiply(PackedOperand packed, std::int32_t weight,
                              DspWeightMode mode = DspWeightMode::kTernary);

/// Four dot products that share weights: tap t multiplies packed[t] by
/// weights[t] on the DSP and the lane products feed four adder trees.
std::array<std::int64_t, kDspLanes> dsp_packed_dot4(std::span<const PackedOperand> packed,
                                                    std::span<const std::int8_t> weights,
                                                    DspWeightMode mode = DspWeightMode::kTernary,
                                                    int acc_bits = 0);

/// One processing-element configuration with its logic cost.
struct PeConfig {
  ActFormat act;
  WeightFormat weight = WeightFormat::ternary();
  int words_per_dot = 1;
  int alms_per_dot = 0;
  // Extra multiplies per DSP block when packing is on; 0 = no packing.
  int dsp_macs_per_block = 0;

  /// FP32 configurations run on the hardened float DSPs, not on ALMs.
  bool dsp_bound() const { return weight.kind() == WeightKind::kFp32; }
  std::string act_name() const;
  std::string weight_name() const;
  /// Short key such as "8x8/8", "2xT/64", "1x1/32" or "fp32".
  std::string name() const;
  /// Short key without the words/dot suffix, e.g. "2xT".
  std::string pair_name() const;

  friend bool operator==(const PeConfig&, const PeConfig&) = default;
};

/// The fifteen tuned PE configurations for Stratix 10 logic.
const std::vector<PeConfig>& pe_catalog();

/// Single-precision baseline: one FP32 MAC per DSP block.
PeConfig fp32_config();

/// Looks up a PE by name: "fp32", a full key like "2xT/64", or a pair key
/// like "2xT" which picks the largest words/dot. Throws ConfigError.
PeConfig select_pe(std::span<const PeConfig> catalog, std::string_view name);

/// Largest words/dot entry per (activation, weight) pair, catalog order.
std::vector<PeConfig> widest_per_pair(std::span<const PeConfig> catalog);

std::optional<PeConfig> find_pe(std::span<const PeConfig> catalog, int act_bits,
                                const WeightFormat& weight, int words_per_dot);

/// Parses "8-bit", "Ternary", "Binary", "1-bit", "FP32" as used in the tables.
WeightFormat parse_weight_name(std::string_view name, int act_bits);
ActFormat parse_act_name(std::string_view name);

}  // namespace lpsim::pe

#endif  // LPSIM_PE_HPP_
