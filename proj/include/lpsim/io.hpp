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

#ifndef LPSIM_IO_HPP_
#define LPSIM_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "lpsim/dse.hpp"
#include "lpsim/engine.hpp"
#include "lpsim/netgraph.hpp"
#include "lpsim/numerics.hpp"
#include "lpsim/pe.hpp"

namespace lpsim::io {

// LPQT tensor container, little-endian throughout:
//
//   offset  size  field
//   0       4     magic "LPQT"
//   4       2     version (u16) = 1
//   6       1     dtype (u8): 1 = unsigned activation codes
//   7       1     bits per code (u8), 1..8
//   8       1     flags (u8): bit 0 = sub-byte packed payload
//   9       1     rank (u8): 4 (N, C, H, W) or 3 (C, H, W; N = 1)
//   10      2     reserved (u16) = 0
//   12      4*r   dims (u32 each)
//   ...           payload
//
// Unpacked payload: one byte per code. Packed payload: codes as a bit stream,
// code i in stream bits [i*bits, (i+1)*bits), stream bit j in byte j/8 at
// bit j%8; unused high bits of the last byte are zero.
inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::uint8_t kDtypeActCodes = 1;
inline constexpr std::uint8_t kFlagPacked = 1;

std::vector<std::uint8_t> encode_tensor(const QTensor& t, bool packed = false);
QTensor decode_tensor(const std::vector<std::uint8_t>& bytes);
void write_tensor(const std::filesystem::path& path, const QTensor& t, bool packed = false);
QTensor read_tensor(const std::filesystem::path& path);

/// Reads a whole file; missing files throw DataError.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

// Topology object:
//   {"name": str, "input": [C, H, W],
//    "layers": [{"name": str, "kind": "conv" | "fc" | "max_pool" | "avg_pool" |
//                "relu" | "quantize" | "eltwise_add" | "bns",
//                "out_channels": int, "kernel": int | [kh, kw], "stride": int,
//                "padding": int, "groups": int,
//                "inputs": [layer name | "input", ...]}]}
// Omitted fields take LayerSpec defaults; omitted inputs mean the previous layer.
Network network_from_json(const nlohmann::json& j);
nlohmann::json network_to_json(const Network& net);

/// A built-in name, or else a path to a topology JSON file.
Network load_network(const std::string& name_or_path);

// Bundle object:
//   {"format": "lpsim-bundle", "version": 1, "network": <topology>,
//    "input_bits": int,
//    "layers": {"<layer name>": {
//        "output_bits": int,
//        "weights": {"format": "ternary" | "binary" | "int2".."int8",
//                    "codes": [int...] in (out, in/groups, kh, kw) order,
//                    "alpha": [real per output feature]},
//        "bns": {"raw": [{"w": r, "x": r, "y": r, "z": r}, ...]}
//             | {"gamma": [r...], "beta": [r...]},
//        "acc_bits": int}}}
// Raw BNS parameters are merged and folded at load time; gamma/beta are taken
// as already folded. Layers without an entry keep their input format.
engine::ModelBundle bundle_from_json(const nlohmann::json& j);
nlohmann::json bundle_to_json(const engine::ModelBundle& bundle);
engine::ModelBundle read_bundle(const std::filesystem::path& path);

std::string weight_format_name(const WeightFormat& w);
WeightFormat parse_weight_format(const std::string& name);

// Device and PE catalogue overrides, same schema as the fixture tables.
std::vector<dse::DeviceSpec> devices_from_json(const nlohmann::json& j);
std::vector<pe::PeConfig> pe_catalog_from_json(const nlohmann::json& j);
nlohmann::json pe_catalog_to_json(std::span<const pe::PeConfig> catalog);

}  // namespace lpsim::io

#endif  // LPSIM_IO_HPP_
