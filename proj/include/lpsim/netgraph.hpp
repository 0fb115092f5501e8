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

#ifndef LPSIM_NETGRAPH_HPP_
#define LPSIM_NETGRAPH_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lpsim {

enum class LayerKind {
  kConv,
  kFullyConnected,
  kMaxPool,
  kAvgPool,
  kBns,
  kRelu,
  kQuantize,
  kEltwiseAdd,
};

std::string_view to_string(LayerKind kind);
/// Accepts the names printed by to_string ("conv", "fc", "max_pool", ...).
LayerKind parse_layer_kind(std::string_view name);

/// Index of the network input in LayerSpec::inputs.
inline constexpr int kNetworkInput = -1;

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kConv;
  int out_channels = 0;  // conv / fc only
  int kernel_h = 1;      // conv / pools
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  int groups = 1;
  // Producer layer indices (kNetworkInput for the image). Empty means the
  // previous layer. Eltwise-add takes exactly two.
  std::vector<int> inputs;

  bool has_weights() const {
    return kind == LayerKind::kConv || kind == LayerKind::kFullyConnected;
  }
};

struct Shape3 {
  int c = 0;
  int h = 0;
  int w = 0;

  std::int64_t size() const { return static_cast<std::int64_t>(c) * h * w; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

std::string to_string(const Shape3& s);

/// Shapes derived for one layer during validation.
struct LayerGeometry {
  std::vector<int> inputs;  // resolved producer indices
  Shape3 in;                // shape of the first input
  Shape3 out;
  /// Multiply-accumulates per image (conv / fc), else 0.
  std::int64_t macs = 0;
  /// Length of each dot product (conv / fc), else 0.
  std::int64_t dot_size = 0;
};

/// Ordered layer list with optional skip edges. Construction validates the
/// graph: producers precede consumers, derived dims are positive, channel
/// groups divide evenly and eltwise-add branches agree in shape.
class Network {
 public:
  Network() = default;
  Network(std::string name, Shape3 input, std::vector<LayerSpec> layers);

  const std::string& name() const { return name_; }
  const Shape3& input() const { return input_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const LayerSpec& layer(std::size_t i) const { return layers_.at(i); }
  const LayerGeometry& geometry(std::size_t i) const { return geometry_.at(i); }
  std::size_t size() const { return layers_.size(); }
  Shape3 output() const { return layers_.empty() ? input_ : geometry_.back().out; }

  int count(LayerKind kind) const;
  /// Index of the layer with this name, or -1.
  int find(std::string_view layer_name) const;

 private:
  std::string name_;
  Shape3 input_{};
  std::vector<LayerSpec> layers_;
  std::vector<LayerGeometry> geometry_;
};

/// Conv + fc operations per image in GOPs (one MAC counts as two ops).
double ops_count(const Network& net);

/// Multiplies every conv / fc filter count by k, except the final classifier
/// layer. The image's input channels are untouched. k must be 1, 2 or 3.
Network widen(const Network& net, int k);

/// ops_count(net) * (act_bits + weight_bits_effective).
double gop_bits(const Network& net, int act_bits, int weight_bits_effective);
double gop_bits(double gops, int act_bits, int weight_bits_effective);

/// "alexnet", "resnet34" or "resnet50". Unknown names throw ConfigError.
Network builtin_network(std::string_view name);
std::vector<std::string> builtin_network_names();

}  // namespace lpsim

#endif  // LPSIM_NETGRAPH_HPP_
