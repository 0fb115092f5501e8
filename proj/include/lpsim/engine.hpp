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

#ifndef LPSIM_ENGINE_HPP_
#define LPSIM_ENGINE_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "lpsim/bns.hpp"
#include "lpsim/netgraph.hpp"
#include "lpsim/numerics.hpp"

namespace lpsim::engine {

/// Weights and merged normalisation of one conv / fc layer.
struct LayerParams {
  QuantizedFilterBank filters;
  /// Merged and already folded with the input code scale.
  bns::BnsFused bns;
  /// Unmerged parameters, kept when the float oracle must be run.
  std::optional<bns::BnsRaw> raw;
  /// Hardware accumulator width; 0 sizes it with pe::acc_width.
  int acc_bits = 0;
};

/// Builds LayerParams from filters and unmerged BNS parameters: copies each
/// feature's alpha into `raw`, fuses, then folds the input code scale.
LayerParams make_layer_params(QuantizedFilterBank filters, bns::BnsRaw raw,
                              ActFormat input_format, int acc_bits = 0);

/// A network plus everything the integer datapath needs to run it.
struct ModelBundle {
  Network network;
  ActFormat input_format{8};
  /// Output activation format of every layer.
  std::vector<ActFormat> output_formats;
  /// Present exactly for conv / fc layers.
  std::vector<std::optional<LayerParams>> params;

  /// Format of the tensor layer i consumes (its first producer's output).
  ActFormat input_format_of(std::size_t layer) const;
  /// Throws DataError when filter shapes, feature counts or formats disagree
  /// with the network.
  void validate() const;
};

enum class PeMode {
  kSpecialized,  // mux / XNOR / packed-DSP engines chosen by format
  kReference,    // plain multiply-accumulate everywhere
};

enum class PeKind { kMac, kBinaryMux, kTernaryMux, kXnorPopcount, kPackedDsp };

const char* to_string(PeKind kind);

struct EngineOptions {
  PeMode pe_mode = PeMode::kSpecialized;
  /// Route 2-bit x ternary layers through the packed DSP multiply.
  bool dsp_packing = false;
  /// Workers per layer; any value gives bit-identical results.
  int threads = 1;
};

/// Dot-product engine a conv / fc layer runs on.
PeKind select_pe_kind(ActFormat input, const WeightFormat& weights, const EngineOptions& options);

/// Per-layer debug surface. acc and post_bns are filled for conv / fc layers
/// (NCHW, same order as output); post_bns also holds the pre-quantisation
/// sums of avg-pool and eltwise-add layers.
struct LayerTrace {
  std::vector<std::int64_t> acc;
  std::vector<float> post_bns;
  QTensor output;
  PeKind pe = PeKind::kMac;
};

/// One layer on explicit inputs (two for eltwise-add).
QTensor run_layer(const ModelBundle& bundle, std::size_t layer_index,
                  const std::vector<const QTensor*>& inputs, const EngineOptions& options = {},
                  LayerTrace* trace = nullptr);

/// Convenience for single-input layers.
QTensor run_layer(const ModelBundle& bundle, std::size_t layer_index, const QTensor& input,
                  const EngineOptions& options = {}, LayerTrace* trace = nullptr);

QTensor run_network(const ModelBundle& bundle, const QTensor& input,
                    const EngineOptions& options = {}, std::vector<LayerTrace>* trace = nullptr);

/// Real-valued NCHW tensor.
struct RealTensor {
  Shape4 shape;
  std::vector<double> values;
};

/// Values the oracle fed into each quantiser, per layer (empty for layers
/// that do not quantise). Tests use it to stay clear of rounding ties.
struct OracleTrace {
  std::vector<std::vector<double>> pre_quant;
  std::vector<RealTensor> outputs;
};

/// Decodes codes to their real values.
RealTensor decode(const QTensor& t);

/// Double-precision mirror of the datapath with nothing merged: real
/// convolution with alpha * w filters, then batch norm, learned scale, ReLU
/// and round-half-up quantisation per layer. Needs LayerParams::raw.
RealTensor run_reference_fp32(const ModelBundle& bundle, const RealTensor& input,
                              OracleTrace* trace = nullptr);

}  // namespace lpsim::engine

#endif  // LPSIM_ENGINE_HPP_
