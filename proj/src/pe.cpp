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

#include "lpsim/pe.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <string>

#include "lpsim/error.hpp"

namespace lpsim::pe {

namespace {

int ceil_log2(std::int64_t n) {
  int bits = 0;
  while ((std::int64_t{1} << bits) < n) ++bits;
  return bits;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw ContractViolation("dot product operands differ in length: " + std::to_string(a) +
                            " vs " + std::to_string(b));
  }
}

// Sums terms either unchecked or through a DotAccumulator.
class Summer {
 public:
  explicit Summer(int acc_bits) : checked_(acc_bits > 0), acc_(checked_ ? acc_bits : 63) {}
  void add(std::int64_t v) {
    if (checked_) {
      acc_.add(v);
    } else {
      sum_ += v;
    }
  }
  std::int64_t value() const { return checked_ ? acc_.value() : sum_; }

 private:
  bool checked_;
  DotAccumulator acc_;
  std::int64_t sum_ = 0;
};

}  // namespace

int acc_width(int act_bits, int weight_bits_effective, std::int64_t dot_size) {
  if (act_bits < 1 || weight_bits_effective < 1 || dot_size < 1) {
    throw ContractViolation("acc_width arguments must be >= 1");
  }
  return act_bits + weight_bits_effective + ceil_log2(dot_size);
}

DotAccumulator::DotAccumulator(int width_bits) : width_bits_(width_bits) {
  if (width_bits < 2 || width_bits > 63) {
    throw ContractViolation("accumulator width must be 2..63 bits");
  }
  limit_ = std::int64_t{1} << (width_bits - 1);
}

bool DotAccumulator::fits(std::int64_t v, int width_bits) {
  const std::int64_t limit = std::int64_t{1} << (width_bits - 1);
  return v > -limit && v < limit;
}

void DotAccumulator::add(std::int64_t v) {
  const std::int64_t next = value_ + v;
  if (next >= limit_ || next <= -limit_) {
    throw AccumulatorOverflow("accumulator overflow: partial sum " + std::to_string(next) +
                              " does not fit " + std::to_string(width_bits_) + " signed bits");
  }
  value_ = next;
}

std::int64_t dot_ref(std::span<const std::int32_t> acts, std::span<const std::int8_t> weights,
                     int acc_bits) {
  check_lengths(acts.size(), weights.size());
  Summer sum(acc_bits);
  for (std::size_t i = 0; i < acts.size(); ++i) {
    sum.add(static_cast<std::int64_t>(acts[i]) * weights[i]);
  }
  return sum.value();
}

std::int64_t dot_binary_mux(std::span<const std::int32_t> acts,
                            std::span<const std::int8_t> weight_codes, int acc_bits) {
  check_lengths(acts.size(), weight_codes.size());
  Summer sum(acc_bits);
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const std::int8_t w = weight_codes[i];
    if (w != 0 && w != 1) throw ContractViolation("binary weight code must be 0 or 1");
    sum.add(w != 0 ? acts[i] : -acts[i]);
  }
  return sum.value();
}

std::int64_t dot_ternary_mux(std::span<const std::int32_t> acts,
                             std::span<const std::int8_t> weight_codes, int acc_bits) {
  check_lengths(acts.size(), weight_codes.size());
  Summer sum(acc_bits);
  for (std::size_t i = 0; i < acts.size(); ++i) {
    switch (weight_codes[i]) {
      case 1: sum.add(acts[i]); break;
      case -1: sum.add(-static_cast<std::int64_t>(acts[i])); break;
      case 0: break;
      default: throw ContractViolation("ternary weight code must be -1, 0 or 1");
    }
  }
  return sum.value();
}

std::int64_t dot_xnor_popcount(std::span<const std::int32_t> act_codes,
                               std::span<const std::int8_t> weight_codes, int acc_bits) {
  check_lengths(act_codes.size(), weight_codes.size());
  const std::size_t n = act_codes.size();
  Summer sum(acc_bits);
  for (std::size_t base = 0; base < n; base += 64) {
    const std::size_t len = std::min<std::size_t>(64, n - base);
    std::uint64_t a = 0;
    std::uint64_t w = 0;
    for (std::size_t i = 0; i < len; ++i) {
      const std::int32_t ac = act_codes[base + i];
      const std::int8_t wc = weight_codes[base + i];
      if ((ac & ~1) != 0 || (wc & ~1) != 0) {
        throw ContractViolation("xnor operands must be 1-bit codes");
      }
      a |= static_cast<std::uint64_t>(ac) << i;
      w |= static_cast<std::uint64_t>(wc) << i;
    }
    const std::uint64_t mask = len == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << len) - 1;
    const int agree = std::popcount(~(a ^ w) & mask);
    sum.add(2 * static_cast<std::int64_t>(agree) - static_cast<std::int64_t>(len));
  }
  return sum.value();
}

PackedOperand pack_dsp_operand(const LaneCodes& lanes) {
  std::uint32_t word = 0;
  for (int i = 0; i < kDspLanes; ++i) {
    if (lanes[i] < 0 || lanes[i] > 3) {
      throw ContractViolation("packed lane " + std::to_string(i) + " holds " +
                              std::to_string(lanes[i]) + ", expected a 2-bit code");
    }
    word |= static_cast<std::uint32_t>(lanes[i]) << (kDspLaneStride * i);
  }
  return PackedOperand{word};
}

LaneCodes unpack_dsp_operand(PackedOperand packed) {
  if (packed.word >> kDspOperandBits != 0) throw ContractViolation("packed word wider than 18 bits");
  LaneCodes lanes{};
  for (int i = 0; i < kDspLanes; ++i) {
    lanes[i] = static_cast<std::int32_t>((packed.word >> (kDspLaneStride * i)) & 0x3u);
  }
  return lanes;
}

LaneCodes dsp_packed_multiply(PackedOperand packed, std::int32_t weight, DspWeightMode mode) {
  const std::int32_t lo = mode == DspWeightMode::kTernary ? -1 : -2;
  if (weight < lo || weight > 1) {
    throw ContractViolation("weight " + std::to_string(weight) + " out of range for packed multiply");
  }
  if (packed.word >> kDspOperandBits != 0) throw ContractViolation("packed word wider than 18 bits");

  // 18x18 signed multiply: the word is non-negative as an 18-bit signed value
  // (top pad bits are zero) and the weight is sign-extended to 18 bits.
  std::int64_t product = static_cast<std::int64_t>(packed.word) * weight;

  constexpr std::int64_t kField = std::int64_t{1} << kDspLaneStride;
  constexpr std::int64_t kHalf = kField / 2;
  LaneCodes lanes{};
  for (int i = 0; i < kDspLanes; ++i) {
    // Low field as a signed 4-bit value; removing it clears any borrow it
    // pushed into the higher lanes.
    std::int64_t field = product & (kField - 1);
    if (field >= kHalf) field -= kField;
    lanes[i] = static_cast<std::int32_t>(field);
    product = (product - field) >> kDspLaneStride;
  }
  return lanes;
}

std::array<std::int64_t, kDspLanes> dsp_packed_dot4(std::span<const PackedOperand> packed,
                                                    std::span<const std::int8_t> weights,
                                                    DspWeightMode mode, int acc_bits) {
  check_lengths(packed.size(), weights.size());
  std::array<Summer, kDspLanes> sums{Summer(acc_bits), Summer(acc_bits), Summer(acc_bits),
                                     Summer(acc_bits)};
  for (std::size_t t = 0; t < packed.size(); ++t) {
    const LaneCodes products = dsp_packed_multiply(packed[t], weights[t], mode);
    for (int i = 0; i < kDspLanes; ++i) sums[i].add(products[i]);
  }
  return {sums[0].value(), sums[1].value(), sums[2].value(), sums[3].value()};
}

std::string PeConfig::act_name() const {
  return dsp_bound() ? "FP32" : std::to_string(act.bits()) + "-bit";
}

std::string PeConfig::weight_name() const {
  // Binary weights next to 1-bit activations are listed as 1-bit (XNOR PE).
  if (weight.kind() == WeightKind::kBinary && act.bipolar()) return "1-bit";
  return weight.long_name();
}

std::string PeConfig::pair_name() const {
  if (dsp_bound()) return "fp32";
  const std::string w =
      weight.kind() == WeightKind::kBinary && act.bipolar() ? "1" : weight.short_name();
  return std::to_string(act.bits()) + "x" + w;
}

std::string PeConfig::name() const {
  if (dsp_bound()) return "fp32";
  return pair_name() + "/" + std::to_string(words_per_dot);
}

namespace {

PeConfig row(int act_bits, WeightFormat weight, int words, int alms, int dsp_macs = 0) {
  PeConfig pe;
  pe.act = ActFormat(act_bits);
  pe.weight = weight;
  pe.words_per_dot = words;
  pe.alms_per_dot = alms;
  pe.dsp_macs_per_block = dsp_macs;
  return pe;
}

}  // namespace

const std::vector<PeConfig>& pe_catalog() {
  static const std::vector<PeConfig> catalog = [] {
    const auto s = WeightFormat::signed_int;
    const auto t = WeightFormat::ternary();
    const auto b = WeightFormat::binary();
    return std::vector<PeConfig>{
        row(8, s(8), 8, 500),  row(8, t, 8, 91),      row(8, t, 16, 176),
        row(8, b, 8, 77),      row(8, b, 16, 149),    row(8, b, 32, 298),
        row(4, s(4), 8, 210),  row(4, s(4), 16, 431), row(3, s(3), 8, 70),
        row(2, s(2), 8, 39),   row(2, s(2), 16, 91),  row(2, s(2), 64, 437),
        row(2, t, 64, 318, 8), row(1, b, 8, 19),      row(1, b, 32, 52),
    };
  }();
  return catalog;
}

PeConfig fp32_config() {
  PeConfig pe;
  pe.act = ActFormat(8);
  pe.weight = WeightFormat::fp32();
  pe.words_per_dot = 1;
  pe.alms_per_dot = 0;
  return pe;
}

PeConfig select_pe(std::span<const PeConfig> catalog, std::string_view name) {
  if (name == "fp32" || name == "FP32") return fp32_config();
  for (const PeConfig& pe : catalog) {
    if (pe.name() == name) return pe;
  }
  std::optional<PeConfig> best;
  for (const PeConfig& pe : catalog) {
    if (pe.pair_name() == name && (!best || pe.words_per_dot > best->words_per_dot)) best = pe;
  }
  if (!best) throw ConfigError("unknown PE configuration '" + std::string(name) + "'");
  return *best;
}

std::vector<PeConfig> widest_per_pair(std::span<const PeConfig> catalog) {
  std::vector<PeConfig> out;
  for (const PeConfig& pe : catalog) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const PeConfig& o) { return o.pair_name() == pe.pair_name(); });
    if (it == out.end()) {
      out.push_back(pe);
    } else if (pe.words_per_dot > it->words_per_dot) {
      *it = pe;
    }
  }
  return out;
}

std::optional<PeConfig> find_pe(std::span<const PeConfig> catalog, int act_bits,
                                const WeightFormat& weight, int words_per_dot) {
  for (const PeConfig& pe : catalog) {
    if (pe.act.bits() == act_bits && pe.weight == weight && pe.words_per_dot == words_per_dot) {
      return pe;
    }
  }
  return std::nullopt;
}

namespace {

int parse_bits(std::string_view name) {
  const auto dash = name.find("-bit");
  int bits = 0;
  if (dash == std::string_view::npos || dash + 4 != name.size()) return -1;
  auto [ptr, ec] = std::from_chars(name.data(), name.data() + dash, bits);
  if (ec != std::errc() || ptr != name.data() + dash) return -1;
  return bits;
}

}  // namespace

WeightFormat parse_weight_name(std::string_view name, int act_bits) {
  if (name == "Ternary") return WeightFormat::ternary();
  if (name == "Binary") return WeightFormat::binary();
  if (name == "FP32") return WeightFormat::fp32();
  const int bits = parse_bits(name);
  if (bits == 1 && act_bits == 1) return WeightFormat::binary();
  if (bits >= 2 && bits <= 8) return WeightFormat::signed_int(bits);
  throw DataError("unrecognised weight format '" + std::string(name) + "'");
}

ActFormat parse_act_name(std::string_view name) {
  const int bits = parse_bits(name);
  if (bits < 1 || bits > 8) {
    throw DataError("unrecognised activation format '" + std::string(name) + "'");
  }
  return ActFormat(bits);
}

}  // namespace lpsim::pe
