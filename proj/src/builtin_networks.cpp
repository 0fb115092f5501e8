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

// Built-in topologies.
//
// alexnet  : single-stream AlexNet (64-192-384-256-256 filters, 224x224
//            input, no channel groups), 1.428 GOPs.
// resnet34 : basic-block ResNet with [3, 4, 6, 3] blocks and 1x1 projection
//            shortcuts where the shape changes.
// resnet50 : bottleneck ResNet with [3, 4, 6, 3] blocks, stride on the first
//            1x1 conv of each downsampling block, projection on the first
//            block of every stage (53 convs).

#include <string>

#include "lpsim/error.hpp"
#include "lpsim/netgraph.hpp"

namespace lpsim {

namespace {

class Builder {
 public:
  int conv(const std::string& name, int out, int kernel, int stride, int pad, int input = kPrev) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::kConv;
    l.out_channels = out;
    l.kernel_h = l.kernel_w = kernel;
    l.stride = stride;
    l.padding = pad;
    return add(std::move(l), input);
  }
  int fc(const std::string& name, int out) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::kFullyConnected;
    l.out_channels = out;
    return add(std::move(l), kPrev);
  }
  int pool(const std::string& name, LayerKind kind, int kernel, int stride, int pad) {
    LayerSpec l;
    l.name = name;
    l.kind = kind;
    l.kernel_h = l.kernel_w = kernel;
    l.stride = stride;
    l.padding = pad;
    return add(std::move(l), kPrev);
  }
  int add_residual(const std::string& name, int a, int b) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::kEltwiseAdd;
    l.inputs = {a, b};
    layers_.push_back(std::move(l));
    return last();
  }
  int last() const { return static_cast<int>(layers_.size()) - 1; }
  std::vector<LayerSpec> take() { return std::move(layers_); }

  static constexpr int kPrev = -2;

 private:
  int add(LayerSpec l, int input) {
    if (input != kPrev) l.inputs = {input};
    layers_.push_back(std::move(l));
    return last();
  }
  std::vector<LayerSpec> layers_;
};

Network alexnet() {
  Builder b;
  b.conv("conv1", 64, 11, 4, 2);
  b.pool("pool1", LayerKind::kMaxPool, 3, 2, 0);
  b.conv("conv2", 192, 5, 1, 2);
  b.pool("pool2", LayerKind::kMaxPool, 3, 2, 0);
  b.conv("conv3", 384, 3, 1, 1);
  b.conv("conv4", 256, 3, 1, 1);
  b.conv("conv5", 256, 3, 1, 1);
  b.pool("pool5", LayerKind::kMaxPool, 3, 2, 0);
  b.fc("fc6", 4096);
  b.fc("fc7", 4096);
  b.fc("fc8", 1000);
  return Network("alexnet", {3, 224, 224}, b.take());
}

constexpr int kStageBlocks[4] = {3, 4, 6, 3};
constexpr int kStageWidth[4] = {64, 128, 256, 512};

Network resnet34() {
  Builder b;
  b.conv("conv1", 64, 7, 2, 3);
  int x = b.pool("pool1", LayerKind::kMaxPool, 3, 2, 1);
  int channels = 64;
  for (int s = 0; s < 4; ++s) {
    for (int k = 0; k < kStageBlocks[s]; ++k) {
      const std::string p = "res" + std::to_string(s + 2) + static_cast<char>('a' + k);
      const int stride = (s > 0 && k == 0) ? 2 : 1;
      const int width = kStageWidth[s];
      b.conv(p + "_branch2a", width, 3, stride, 1, x);
      const int main = b.conv(p + "_branch2b", width, 3, 1, 1);
      int shortcut = x;
      if (stride != 1 || channels != width) {
        shortcut = b.conv(p + "_branch1", width, 1, stride, 0, x);
      }
      x = b.add_residual(p, main, shortcut);
      channels = width;
    }
  }
  b.pool("pool5", LayerKind::kAvgPool, 7, 1, 0);
  b.fc("fc1000", 1000);
  return Network("resnet34", {3, 224, 224}, b.take());
}

Network resnet50() {
  Builder b;
  b.conv("conv1", 64, 7, 2, 3);
  int x = b.pool("pool1", LayerKind::kMaxPool, 3, 2, 1);
  int channels = 64;
  for (int s = 0; s < 4; ++s) {
    for (int k = 0; k < kStageBlocks[s]; ++k) {
      const std::string p = "res" + std::to_string(s + 2) + static_cast<char>('a' + k);
      const int stride = (s > 0 && k == 0) ? 2 : 1;
      const int width = kStageWidth[s];
      const int out = 4 * width;
      b.conv(p + "_branch2a", width, 1, stride, 0, x);
      b.conv(p + "_branch2b", width, 3, 1, 1);
      const int main = b.conv(p + "_branch2c", out, 1, 1, 0);
      int shortcut = x;
      if (stride != 1 || channels != out) {
        shortcut = b.conv(p + "_branch1", out, 1, stride, 0, x);
      }
      x = b.add_residual(p, main, shortcut);
      channels = out;
    }
  }
  b.pool("pool5", LayerKind::kAvgPool, 7, 1, 0);
  b.fc("fc1000", 1000);
  return Network("resnet50", {3, 224, 224}, b.take());
}

}  // namespace

Network builtin_network(std::string_view name) {
  if (name == "alexnet") return alexnet();
  if (name == "resnet34") return resnet34();
  if (name == "resnet50") return resnet50();
  throw ConfigError("unknown network '" + std::string(name) +
                    "' (built-ins: alexnet, resnet34, resnet50)");
}

std::vector<std::string> builtin_network_names() { return {"alexnet", "resnet34", "resnet50"}; }

}  // namespace lpsim
