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

#include "lpsim/io.hpp"

#include <fstream>
#include <iterator>
#include <map>
#include <string>

#include "lpsim/bns.hpp"
#include "lpsim/error.hpp"

namespace lpsim::io {

using nlohmann::json;

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

constexpr std::size_t kHeaderBytes = 12;

}  // namespace

std::vector<std::uint8_t> encode_tensor(const QTensor& t, bool packed) {
  t.validate();
  const int bits = t.format().bits();
  std::vector<std::uint8_t> out{'L', 'P', 'Q', 'T'};
  put_u16(out, kTensorVersion);
  out.push_back(kDtypeActCodes);
  out.push_back(static_cast<std::uint8_t>(bits));
  out.push_back(packed ? kFlagPacked : 0);
  out.push_back(4);
  put_u16(out, 0);
  const Shape4& s = t.shape();
  for (int d : {s.n, s.c, s.h, s.w}) put_u32(out, static_cast<std::uint32_t>(d));
  if (!packed) {
    for (std::int32_t c : t.codes()) out.push_back(static_cast<std::uint8_t>(c));
    return out;
  }
  const std::size_t base = out.size();
  out.resize(base + (t.codes().size() * bits + 7) / 8, 0);
  std::size_t bit = 0;
  for (std::int32_t c : t.codes()) {
    for (int b = 0; b < bits; ++b, ++bit) {
      if ((c >> b) & 1) out[base + bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    }
  }
  return out;
}

QTensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes || bytes[0] != 'L' || bytes[1] != 'P' || bytes[2] != 'Q' ||
      bytes[3] != 'T') {
    throw DataError("not an LPQT tensor (bad magic)");
  }
  const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kTensorVersion) {
    throw DataError("unsupported LPQT version " + std::to_string(version));
  }
  if (bytes[6] != kDtypeActCodes) {
    throw DataError("unsupported LPQT dtype " + std::to_string(bytes[6]));
  }
  const int bits = bytes[7];
  if (bits < 1 || bits > 8) throw DataError("LPQT code width must be 1..8 bits");
  const std::uint8_t flags = bytes[8];
  if ((flags & ~kFlagPacked) != 0) throw DataError("unknown LPQT flags");
  const int rank = bytes[9];
  if (rank != 3 && rank != 4) throw DataError("LPQT rank must be 3 or 4");
  if (bytes[10] != 0 || bytes[11] != 0) throw DataError("LPQT reserved bytes must be zero");
  if (bytes.size() < kHeaderBytes + 4u * rank) throw DataError("truncated LPQT header");

  std::vector<std::uint32_t> dims;
  for (int r = 0; r < rank; ++r) dims.push_back(get_u32(bytes, kHeaderBytes + 4u * r));
  if (rank == 3) dims.insert(dims.begin(), 1);
  for (std::uint32_t d : dims) {
    if (d == 0 || d > (1u << 30)) throw DataError("LPQT dims must be positive");
  }
  const Shape4 shape{static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                     static_cast<int>(dims[2]), static_cast<int>(dims[3])};
  const std::size_t count = shape.size();
  const std::size_t base = kHeaderBytes + 4u * rank;
  const bool packed = flags & kFlagPacked;
  const std::size_t payload = packed ? (count * bits + 7) / 8 : count;
  if (bytes.size() != base + payload) {
    throw DataError("LPQT payload holds " + std::to_string(bytes.size() - base) +
                    " bytes, expected " + std::to_string(payload));
  }
  std::vector<std::int32_t> codes(count);
  if (packed) {
    std::size_t bit = 0;
    for (std::size_t i = 0; i < count; ++i) {
      std::int32_t c = 0;
      for (int b = 0; b < bits; ++b, ++bit) {
        c |= ((bytes[base + bit / 8] >> (bit % 8)) & 1) << b;
      }
      codes[i] = c;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) codes[i] = bytes[base + i];
  }
  return QTensor(shape, ActFormat(bits), std::move(codes));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_tensor(const std::filesystem::path& path, const QTensor& t, bool packed) {
  const auto bytes = encode_tensor(t, packed);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

QTensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

namespace {

// Wraps nlohmann type errors into DataError with a location.
template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw DataError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(where + ": bad '" + key + "': " + e.what());
  }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? field<T>(j, key, where) : fallback;
}

}  // namespace

Network network_from_json(const json& j) {
  if (!j.is_object()) throw DataError("topology must be a JSON object");
  const std::string name = field<std::string>(j, "name", "topology");
  const auto in = field<std::vector<int>>(j, "input", name);
  if (in.size() != 3) throw DataError(name + ": input must be [C, H, W]");
  std::map<std::string, int> index;
  std::vector<LayerSpec> layers;
  if (!j.contains("layers") || !j["layers"].is_array()) {
    throw DataError(name + ": 'layers' must be an array");
  }
  for (const json& lj : j["layers"]) {
    LayerSpec l;
    l.name = field<std::string>(lj, "name", name);
    const std::string where = name + "/" + l.name;
    l.kind = parse_layer_kind(field<std::string>(lj, "kind", where));
    l.out_channels = field_or(lj, "out_channels", 0, where);
    if (lj.contains("kernel")) {
      if (lj["kernel"].is_array()) {
        const auto k = field<std::vector<int>>(lj, "kernel", where);
        if (k.size() != 2) throw DataError(where + ": kernel must be int or [kh, kw]");
        l.kernel_h = k[0];
        l.kernel_w = k[1];
      } else {
        l.kernel_h = l.kernel_w = field<int>(lj, "kernel", where);
      }
    }
    l.stride = field_or(lj, "stride", 1, where);
    l.padding = field_or(lj, "padding", 0, where);
    l.groups = field_or(lj, "groups", 1, where);
    for (const auto& src : field_or(lj, "inputs", std::vector<std::string>{}, where)) {
      if (src == "input") {
        l.inputs.push_back(kNetworkInput);
      } else if (auto it = index.find(src); it != index.end()) {
        l.inputs.push_back(it->second);
      } else {
        throw DataError(where + ": input '" + src + "' is not an earlier layer");
      }
    }
    index[l.name] = static_cast<int>(layers.size());
    layers.push_back(std::move(l));
  }
  return Network(name, {in[0], in[1], in[2]}, std::move(layers));
}

json network_to_json(const Network& net) {
  json layers = json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    const LayerSpec& l = net.layer(i);
    json lj{{"name", l.name}, {"kind", std::string(to_string(l.kind))}};
    if (l.has_weights()) lj["out_channels"] = l.out_channels;
    if (l.kind != LayerKind::kFullyConnected && l.kind != LayerKind::kEltwiseAdd &&
        l.kind != LayerKind::kBns && l.kind != LayerKind::kRelu &&
        l.kind != LayerKind::kQuantize) {
      if (l.kernel_h == l.kernel_w) {
        lj["kernel"] = l.kernel_h;
      } else {
        lj["kernel"] = {l.kernel_h, l.kernel_w};
      }
      lj["stride"] = l.stride;
      lj["padding"] = l.padding;
    }
    if (l.groups != 1) lj["groups"] = l.groups;
    if (!l.inputs.empty()) {
      json ins = json::array();
      for (int src : l.inputs) ins.push_back(src == kNetworkInput ? "input" : net.layer(src).name);
      lj["inputs"] = ins;
    }
    layers.push_back(std::move(lj));
  }
  return json{{"name", net.name()},
              {"input", {net.input().c, net.input().h, net.input().w}},
              {"layers", layers}};
}

Network load_network(const std::string& name_or_path) {
  for (const auto& n : builtin_network_names()) {
    if (n == name_or_path) return builtin_network(n);
  }
  if (!std::filesystem::exists(name_or_path)) {
    throw ConfigError("unknown network '" + name_or_path +
                      "' (not a built-in name or an existing topology file)");
  }
  return network_from_json(read_json(name_or_path));
}

std::string weight_format_name(const WeightFormat& w) {
  switch (w.kind()) {
    case WeightKind::kTernary: return "ternary";
    case WeightKind::kBinary: return "binary";
    case WeightKind::kSignedInt: return "int" + std::to_string(w.effective_bits());
    case WeightKind::kFp32: break;
  }
  return "fp32";
}

WeightFormat parse_weight_format(const std::string& name) {
  if (name == "ternary") return WeightFormat::ternary();
  if (name == "binary") return WeightFormat::binary();
  if (name == "fp32") return WeightFormat::fp32();
  if (name.size() == 4 && name.rfind("int", 0) == 0 && name[3] >= '2' && name[3] <= '8') {
    return WeightFormat::signed_int(name[3] - '0');
  }
  throw DataError("unknown weight format '" + name + "'");
}

engine::ModelBundle bundle_from_json(const json& j) {
  if (!j.is_object() || field_or<std::string>(j, "format", "", "bundle") != "lpsim-bundle") {
    throw DataError("bundle: expected \"format\": \"lpsim-bundle\"");
  }
  if (field<int>(j, "version", "bundle") != 1) throw DataError("bundle: unsupported version");
  if (!j.contains("network")) throw DataError("bundle: missing 'network'");
  engine::ModelBundle b;
  b.network = network_from_json(j["network"]);
  try {
    b.input_format = ActFormat(field_or(j, "input_bits", 8, "bundle"));
  } catch (const ContractViolation& e) {
    throw DataError(std::string("bundle: ") + e.what());
  }
  const json layers = j.value("layers", json::object());
  if (!layers.is_object()) throw DataError("bundle: 'layers' must be an object keyed by name");
  for (auto it = layers.begin(); it != layers.end(); ++it) {
    if (b.network.find(it.key()) < 0) throw DataError("bundle: no layer named '" + it.key() + "'");
  }

  const std::size_t n = b.network.size();
  b.output_formats.resize(n);
  b.params.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const LayerSpec& l = b.network.layer(i);
    const std::string where = "bundle/" + l.name;
    const ActFormat in_fmt = b.input_format_of(i);
    const json lj = layers.value(l.name, json::object());
    try {
      b.output_formats[i] = ActFormat(field_or(lj, "output_bits", in_fmt.bits(), where));
    } catch (const ContractViolation& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!l.has_weights()) {
      if (lj.contains("weights") || lj.contains("bns")) {
        throw DataError(where + ": only conv/fc layers carry weights");
      }
      continue;
    }
    if (!lj.contains("weights") || !lj.contains("bns")) {
      throw DataError(where + ": conv/fc layers need 'weights' and 'bns'");
    }
    const json& wj = lj["weights"];
    const LayerGeometry& geo = b.network.geometry(i);
    QuantizedFilterBank bank;
    bank.format = parse_weight_format(field<std::string>(wj, "format", where));
    bank.out_features = l.out_channels;
    if (l.kind == LayerKind::kFullyConnected) {
      bank.in_channels = static_cast<int>(geo.in.size());
    } else {
      bank.in_channels = geo.in.c / l.groups;
      bank.kernel_h = l.kernel_h;
      bank.kernel_w = l.kernel_w;
    }
    for (int c : field<std::vector<int>>(wj, "codes", where)) {
      if (c < -128 || c > 127) throw DataError(where + ": weight code out of int8 range");
      bank.codes.push_back(static_cast<std::int8_t>(c));
    }
    bank.alpha = field<std::vector<double>>(wj, "alpha", where);
    try {
      bank.validate();
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }

    const json& bj = lj["bns"];
    const int acc_bits = field_or(lj, "acc_bits", 0, where);
    if (bj.contains("raw")) {
      bns::BnsRaw raw;
      for (const json& fj : bj["raw"]) {
        bns::BnsFeature f;
        f.bn_shift = field<double>(fj, "w", where);
        f.bn_divisor = field<double>(fj, "x", where);
        f.scale = field<double>(fj, "y", where);
        f.shift = field<double>(fj, "z", where);
        raw.push_back(f);
      }
      try {
        b.params[i] = engine::make_layer_params(std::move(bank), std::move(raw), in_fmt, acc_bits);
      } catch (const DataError& e) {
        throw DataError(where + ": " + e.what());
      }
    } else {
      engine::LayerParams p;
      p.filters = std::move(bank);
      p.bns.gamma = field<std::vector<double>>(bj, "gamma", where);
      p.bns.beta = field<std::vector<double>>(bj, "beta", where);
      p.acc_bits = acc_bits;
      b.params[i] = std::move(p);
    }
  }
  b.validate();
  return b;
}

json bundle_to_json(const engine::ModelBundle& bundle) {
  json layers = json::object();
  for (std::size_t i = 0; i < bundle.network.size(); ++i) {
    const LayerSpec& l = bundle.network.layer(i);
    json lj{{"output_bits", bundle.output_formats[i].bits()}};
    if (const auto& p = bundle.params[i]) {
      std::vector<int> codes(p->filters.codes.begin(), p->filters.codes.end());
      lj["weights"] = {{"format", weight_format_name(p->filters.format)},
                       {"codes", codes},
                       {"alpha", p->filters.alpha}};
      if (p->raw) {
        json raw = json::array();
        for (const auto& f : *p->raw) {
          raw.push_back({{"w", f.bn_shift}, {"x", f.bn_divisor}, {"y", f.scale}, {"z", f.shift}});
        }
        lj["bns"] = {{"raw", raw}};
      } else {
        lj["bns"] = {{"gamma", p->bns.gamma}, {"beta", p->bns.beta}};
      }
      if (p->acc_bits != 0) lj["acc_bits"] = p->acc_bits;
    }
    layers[l.name] = std::move(lj);
  }
  return json{{"format", "lpsim-bundle"},
              {"version", 1},
              {"network", network_to_json(bundle.network)},
              {"input_bits", bundle.input_format.bits()},
              {"layers", layers}};
}

engine::ModelBundle read_bundle(const std::filesystem::path& path) {
  return bundle_from_json(read_json(path));
}

std::vector<dse::DeviceSpec> devices_from_json(const json& j) {
  std::vector<dse::DeviceSpec> out;
  if (!j.contains("devices") || !j["devices"].is_array()) {
    throw DataError("device table needs a 'devices' array");
  }
  for (const json& dj : j["devices"]) {
    dse::DeviceSpec d;
    d.name = field<std::string>(dj, "name", "devices");
    d.dsp_blocks = field<std::int64_t>(dj, "dsp_blocks", d.name);
    d.alms = field<std::int64_t>(dj, "alms", d.name);
    d.m20k_kbits = field<double>(dj, "m20k_kbits", d.name);
    d.mlab_kbits = field<double>(dj, "mlab_kbits", d.name);
    d.fmax_hz = field<double>(dj, "fmax_mhz", d.name) * 1e6;
    d.validate();
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<pe::PeConfig> pe_catalog_from_json(const json& j) {
  std::vector<pe::PeConfig> out;
  if (!j.contains("rows") || !j["rows"].is_array()) {
    throw DataError("PE catalogue needs a 'rows' array");
  }
  for (const json& rj : j["rows"]) {
    pe::PeConfig c;
    c.act = pe::parse_act_name(field<std::string>(rj, "activation", "pe"));
    c.weight = pe::parse_weight_name(field<std::string>(rj, "weight", "pe"), c.act.bits());
    c.words_per_dot = field<int>(rj, "words_per_dot", "pe");
    c.alms_per_dot = field<int>(rj, "alms_per_dot", "pe");
    c.dsp_macs_per_block = field_or(rj, "dsp_macs_per_block", 0, "pe");
    if (c.words_per_dot < 1 || c.alms_per_dot < 0 || c.dsp_macs_per_block < 0) {
      throw DataError("PE row " + c.name() + ": words/dot >= 1 and costs >= 0 required");
    }
    out.push_back(c);
  }
  return out;
}

json pe_catalog_to_json(std::span<const pe::PeConfig> catalog) {
  json rows = json::array();
  for (const pe::PeConfig& c : catalog) {
    json r{{"activation", c.act_name()},
           {"weight", c.weight_name()},
           {"words_per_dot", c.words_per_dot},
           {"alms_per_dot", c.alms_per_dot}};
    if (c.dsp_macs_per_block != 0) r["dsp_macs_per_block"] = c.dsp_macs_per_block;
    rows.push_back(std::move(r));
  }
  return json{{"rows", rows}};
}

}  // namespace lpsim::io
