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

#include "lpsim/netgraph.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "lpsim/error.hpp"

namespace lpsim {

namespace {

struct KindName {
  LayerKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {LayerKind::kConv, "conv"},         {LayerKind::kFullyConnected, "fc"},
    {LayerKind::kMaxPool, "max_pool"},  {LayerKind::kAvgPool, "avg_pool"},
    {LayerKind::kBns, "bns"},           {LayerKind::kRelu, "relu"},
    {LayerKind::kQuantize, "quantize"}, {LayerKind::kEltwiseAdd, "eltwise_add"},
};

int window_out(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (const auto& kn : kKindNames) {
    if (kn.name == name) return kn.kind;
  }
  throw DataError("unknown layer kind '" + std::string(name) + "'");
}

std::string to_string(const Shape3& s) {
  return std::to_string(s.c) + "x" + std::to_string(s.h) + "x" + std::to_string(s.w);
}

Network::Network(std::string name, Shape3 input, std::vector<LayerSpec> layers)
    : name_(std::move(name)), input_(input), layers_(std::move(layers)) {
  if (input_.c <= 0 || input_.h <= 0 || input_.w <= 0) {
    throw DataError(name_ + ": input shape must be positive");
  }
  std::set<std::string> names;
  geometry_.reserve(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    const std::string where = name_ + "/" + l.name + ": ";
    if (l.name.empty() || !names.insert(l.name).second) {
      throw DataError(where + "layer names must be unique and nonempty");
    }

    LayerGeometry g;
    g.inputs = l.inputs.empty() ? std::vector<int>{static_cast<int>(i) - 1} : l.inputs;
    const std::size_t want = l.kind == LayerKind::kEltwiseAdd ? 2 : 1;
    if (g.inputs.size() != want) {
      throw DataError(where + "expects " + std::to_string(want) + " input(s)");
    }
    std::vector<Shape3> in_shapes;
    for (int src : g.inputs) {
      if (src < kNetworkInput || src >= static_cast<int>(i)) {
        throw DataError(where + "input must be an earlier layer");
      }
      in_shapes.push_back(src == kNetworkInput ? input_ : geometry_[src].out);
    }
    g.in = in_shapes.front();

    switch (l.kind) {
      case LayerKind::kConv: {
        if (l.out_channels <= 0 || l.kernel_h <= 0 || l.kernel_w <= 0 || l.stride <= 0 ||
            l.padding < 0 || l.groups <= 0) {
          throw DataError(where + "invalid conv parameters");
        }
        if (g.in.c % l.groups != 0 || l.out_channels % l.groups != 0) {
          throw DataError(where + "groups must divide input and output channels");
        }
        g.out = {l.out_channels, window_out(g.in.h, l.kernel_h, l.stride, l.padding),
                 window_out(g.in.w, l.kernel_w, l.stride, l.padding)};
        g.dot_size = static_cast<std::int64_t>(g.in.c / l.groups) * l.kernel_h * l.kernel_w;
        g.macs = g.dot_size * g.out.size();
        break;
      }
      case LayerKind::kFullyConnected:
        if (l.out_channels <= 0) throw DataError(where + "fc needs out_channels > 0");
        g.out = {l.out_channels, 1, 1};
        g.dot_size = g.in.size();
        g.macs = g.dot_size * l.out_channels;
        break;
      case LayerKind::kMaxPool:
      case LayerKind::kAvgPool:
        if (l.kernel_h <= 0 || l.kernel_w <= 0 || l.stride <= 0 || l.padding < 0) {
          throw DataError(where + "invalid pooling window");
        }
        g.out = {g.in.c, window_out(g.in.h, l.kernel_h, l.stride, l.padding),
                 window_out(g.in.w, l.kernel_w, l.stride, l.padding)};
        break;
      case LayerKind::kEltwiseAdd:
        if (in_shapes[0] != in_shapes[1]) {
          throw DataError(where + "eltwise-add branches differ: " + to_string(in_shapes[0]) +
                          " vs " + to_string(in_shapes[1]));
        }
        g.out = g.in;
        break;
      case LayerKind::kBns:
      case LayerKind::kRelu:
      case LayerKind::kQuantize:
        g.out = g.in;
        break;
    }
    if (g.out.c <= 0 || g.out.h <= 0 || g.out.w <= 0) {
      throw DataError(where + "derived output shape " + to_string(g.out) + " is not positive");
    }
    geometry_.push_back(std::move(g));
  }
}

int Network::count(LayerKind kind) const {
  return static_cast<int>(std::count_if(layers_.begin(), layers_.end(),
                                        [&](const LayerSpec& l) { return l.kind == kind; }));
}

int Network::find(std::string_view layer_name) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].name == layer_name) return static_cast<int>(i);
  }
  return -1;
}

double ops_count(const Network& net) {
  std::int64_t macs = 0;
  for (std::size_t i = 0; i < net.size(); ++i) macs += net.geometry(i).macs;
  return 2.0 * static_cast<double>(macs) / 1e9;
}

Network widen(const Network& net, int k) {
  if (k < 1 || k > 3) throw ContractViolation("widen factor must be 1, 2 or 3");
  std::vector<LayerSpec> layers = net.layers();
  int classifier = -1;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].has_weights()) classifier = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].has_weights() && static_cast<int>(i) != classifier) {
      layers[i].out_channels *= k;
    }
  }
  return Network(net.name(), net.input(), std::move(layers));
}

double gop_bits(double gops, int act_bits, int weight_bits_effective) {
  if (act_bits < 1 || weight_bits_effective < 1) {
    throw ContractViolation("gop_bits widths must be >= 1");
  }
  return gops * (act_bits + weight_bits_effective);
}

double gop_bits(const Network& net, int act_bits, int weight_bits_effective) {
  return gop_bits(ops_count(net), act_bits, weight_bits_effective);
}

}  // namespace lpsim
