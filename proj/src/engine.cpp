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

#include "lpsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include "lpsim/error.hpp"
#include "lpsim/pe.hpp"

namespace lpsim::engine {

namespace {

// Conv view of a conv or fc layer; fc is a 1x1 conv over the flattened input.
struct ConvGeometry {
  Shape3 in;
  Shape3 out;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  int groups = 1;
  int in_per_group = 0;
  int out_per_group = 0;
};

ConvGeometry conv_geometry(const Network& net, std::size_t i) {
  const LayerSpec& l = net.layer(i);
  const LayerGeometry& g = net.geometry(i);
  ConvGeometry c;
  if (l.kind == LayerKind::kFullyConnected) {
    c.in = {static_cast<int>(g.in.size()), 1, 1};
    c.out = {l.out_channels, 1, 1};
  } else {
    c.in = g.in;
    c.out = g.out;
    c.kernel_h = l.kernel_h;
    c.kernel_w = l.kernel_w;
    c.stride = l.stride;
    c.padding = l.padding;
    c.groups = l.groups;
  }
  c.in_per_group = c.in.c / c.groups;
  c.out_per_group = c.out.c / c.groups;
  return c;
}

// Runs fn(begin, end) over [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int, int)>& fn) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  if (threads == 1) {
    fn(0, count);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int begin = static_cast<int>(static_cast<std::int64_t>(count) * t / threads);
    const int end = static_cast<int>(static_cast<std::int64_t>(count) * (t + 1) / threads);
    workers.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

std::string layer_where(const ModelBundle& b, std::size_t i) {
  return "layer " + std::to_string(i) + " (" + b.network.layer(i).name + "): ";
}

std::int64_t run_dot(PeKind kind, std::span<const std::int32_t> acts,
                     std::span<const std::int8_t> codes, std::span<const std::int8_t> values,
                     int acc_bits) {
  switch (kind) {
    case PeKind::kBinaryMux: return pe::dot_binary_mux(acts, codes, acc_bits);
    case PeKind::kTernaryMux: return pe::dot_ternary_mux(acts, codes, acc_bits);
    case PeKind::kXnorPopcount: return pe::dot_xnor_popcount(acts, codes, acc_bits);
    case PeKind::kMac:
    case PeKind::kPackedDsp: break;
  }
  return pe::dot_ref(acts, values, acc_bits);
}

QTensor run_conv(const ModelBundle& b, std::size_t i, const QTensor& input,
                 const EngineOptions& options, LayerTrace* trace) {
  const LayerParams& p = *b.params[i];
  const QuantizedFilterBank& bank = p.filters;
  const ConvGeometry g = conv_geometry(b.network, i);
  const ActFormat in_fmt = input.format();
  const ActFormat out_fmt = b.output_formats[i];
  const int n_batch = input.shape().n;

  const PeKind kind = options.pe_mode == PeMode::kReference
                          ? PeKind::kMac
                          : select_pe_kind(in_fmt, bank.format, options);
  const std::int64_t dot_size = static_cast<std::int64_t>(bank.filter_size());
  const int acc_bits = p.acc_bits > 0 ? p.acc_bits
                                      : pe::acc_width(in_fmt.bits(),
                                                      bank.format.effective_bits(), dot_size);

  // Integer weight values for the MAC path.
  std::vector<std::int8_t> values(bank.codes.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = static_cast<std::int8_t>(bank.format.decode(bank.codes[k]));
  }

  const Shape4 out_shape{n_batch, g.out.c, g.out.h, g.out.w};
  QTensor out(out_shape, out_fmt);
  if (trace) {
    trace->acc.assign(out_shape.size(), 0);
    trace->post_bns.assign(out_shape.size(), 0.0f);
    trace->pe = kind;
  }
  // fc flattens NCHW, so its single "channel" index walks c, h, w in order.
  const auto in_code = [&](int n, int c, int y, int x) -> std::int32_t {
    if (b.network.layer(i).kind == LayerKind::kFullyConnected) {
      return input.codes()[static_cast<std::size_t>(n) * g.in.c + c];
    }
    return input.at(n, c, y, x);
  };
  const bool raw_codes = kind == PeKind::kXnorPopcount;
  const auto operand = [&](std::int32_t code) {
    return raw_codes ? code : act_operand(code, in_fmt);
  };
  const auto emit = [&](int n, int f, int oy, int ox, std::int64_t acc) {
    const float v = bns::apply(acc, p.bns, f);
    const std::size_t idx = out.index(n, f, oy, ox);
    out.mutable_codes()[idx] = quantize_activation(v, out_fmt);
    if (trace) {
      trace->acc[idx] = acc;
      trace->post_bns[idx] = v;
    }
  };

  const std::size_t taps = bank.filter_size();
  parallel_for(n_batch * g.out.h, options.threads, [&](int begin, int end) {
    std::vector<std::int32_t> patch(taps);
    std::vector<pe::PackedOperand> packed(taps);
    for (int r = begin; r < end; ++r) {
      const int n = r / g.out.h;
      const int oy = r % g.out.h;
      const int step = kind == PeKind::kPackedDsp ? pe::kDspLanes : 1;
      for (int ox0 = 0; ox0 < g.out.w; ox0 += step) {
        for (int grp = 0; grp < g.groups; ++grp) {
          std::size_t t = 0;
          for (int c = 0; c < g.in_per_group; ++c) {
            const int ic = grp * g.in_per_group + c;
            for (int ky = 0; ky < g.kernel_h; ++ky) {
              const int iy = oy * g.stride - g.padding + ky;
              for (int kx = 0; kx < g.kernel_w; ++kx, ++t) {
                if (kind == PeKind::kPackedDsp) {
                  pe::LaneCodes lanes{};
                  for (int l = 0; l < pe::kDspLanes; ++l) {
                    const int ix = (ox0 + l) * g.stride - g.padding + kx;
                    const bool inside = ox0 + l < g.out.w && iy >= 0 && iy < g.in.h && ix >= 0 &&
                                        ix < g.in.w;
                    lanes[l] = inside ? in_code(n, ic, iy, ix) : 0;
                  }
                  packed[t] = pe::pack_dsp_operand(lanes);
                } else {
                  const int ix = ox0 * g.stride - g.padding + kx;
                  const bool inside = iy >= 0 && iy < g.in.h && ix >= 0 && ix < g.in.w;
                  patch[t] = inside ? operand(in_code(n, ic, iy, ix)) : 0;
                }
              }
            }
          }
          for (int fo = 0; fo < g.out_per_group; ++fo) {
            const int f = grp * g.out_per_group + fo;
            const auto codes = bank.filter(f);
            if (kind == PeKind::kPackedDsp) {
              const auto accs =
                  pe::dsp_packed_dot4(packed, codes, pe::DspWeightMode::kTernary, acc_bits);
              for (int l = 0; l < pe::kDspLanes && ox0 + l < g.out.w; ++l) {
                emit(n, f, oy, ox0 + l, accs[l]);
              }
            } else {
              const auto vals = std::span<const std::int8_t>(values).subspan(f * taps, taps);
              emit(n, f, oy, ox0, run_dot(kind, patch, codes, vals, acc_bits));
            }
          }
        }
      }
    }
  });
  return out;
}

QTensor run_pool(const ModelBundle& b, std::size_t i, const QTensor& input, LayerTrace* trace) {
  const LayerSpec& l = b.network.layer(i);
  const LayerGeometry& geo = b.network.geometry(i);
  const ActFormat in_fmt = input.format();
  const ActFormat out_fmt = b.output_formats[i];
  const Shape4 out_shape{input.shape().n, geo.out.c, geo.out.h, geo.out.w};
  QTensor out(out_shape, out_fmt);
  const bool is_max = l.kind == LayerKind::kMaxPool;
  if (trace && !is_max) trace->post_bns.assign(out_shape.size(), 0.0f);

  for (int n = 0; n < out_shape.n; ++n) {
    for (int c = 0; c < out_shape.c; ++c) {
      for (int oy = 0; oy < out_shape.h; ++oy) {
        for (int ox = 0; ox < out_shape.w; ++ox) {
          std::int32_t best = -1;
          double sum = 0.0;
          int count = 0;
          for (int ky = 0; ky < l.kernel_h; ++ky) {
            const int iy = oy * l.stride - l.padding + ky;
            if (iy < 0 || iy >= geo.in.h) continue;
            for (int kx = 0; kx < l.kernel_w; ++kx) {
              const int ix = ox * l.stride - l.padding + kx;
              if (ix < 0 || ix >= geo.in.w) continue;
              const std::int32_t code = input.at(n, c, iy, ix);
              best = std::max(best, code);
              sum += decode_act(code, in_fmt);
              ++count;
            }
          }
          if (count == 0) throw DataError(layer_where(b, i) + "pooling window sees only padding");
          const std::size_t idx = out.index(n, c, oy, ox);
          if (is_max) {
            // Codes are monotone in value, so the max code is the max value.
            out.mutable_codes()[idx] = best;
          } else {
            const double mean = sum / count;
            out.mutable_codes()[idx] = quantize_activation(mean, out_fmt);
            if (trace) trace->post_bns[idx] = static_cast<float>(mean);
          }
        }
      }
    }
  }
  return out;
}

QTensor run_requantize(const ModelBundle& b, std::size_t i, const QTensor& input) {
  QTensor out(input.shape(), b.output_formats[i]);
  for (std::size_t k = 0; k < input.codes().size(); ++k) {
    out.mutable_codes()[k] = quantize_activation(decode_act(input.codes()[k], input.format()),
                                                 b.output_formats[i]);
  }
  return out;
}

QTensor run_eltwise(const ModelBundle& b, std::size_t i, const QTensor& a, const QTensor& c,
                    LayerTrace* trace) {
  QTensor out(a.shape(), b.output_formats[i]);
  if (trace) trace->post_bns.assign(a.codes().size(), 0.0f);
  for (std::size_t k = 0; k < a.codes().size(); ++k) {
    const double sum = decode_act(a.codes()[k], a.format()) + decode_act(c.codes()[k], c.format());
    out.mutable_codes()[k] = quantize_activation(sum, b.output_formats[i]);
    if (trace) trace->post_bns[k] = static_cast<float>(sum);
  }
  return out;
}

ActFormat producer_format(const ModelBundle& b, int src) {
  return src == kNetworkInput ? b.input_format : b.output_formats.at(src);
}

Shape3 producer_shape(const Network& net, int src) {
  return src == kNetworkInput ? net.input() : net.geometry(src).out;
}

}  // namespace

const char* to_string(PeKind kind) {
  switch (kind) {
    case PeKind::kMac: return "mac";
    case PeKind::kBinaryMux: return "binary-mux";
    case PeKind::kTernaryMux: return "ternary-mux";
    case PeKind::kXnorPopcount: return "xnor-popcount";
    case PeKind::kPackedDsp: return "packed-dsp";
  }
  return "unknown";
}

PeKind select_pe_kind(ActFormat input, const WeightFormat& weights, const EngineOptions& options) {
  switch (weights.kind()) {
    case WeightKind::kBinary:
      return input.bipolar() ? PeKind::kXnorPopcount : PeKind::kBinaryMux;
    case WeightKind::kTernary:
      return options.dsp_packing && input.bits() == 2 ? PeKind::kPackedDsp : PeKind::kTernaryMux;
    case WeightKind::kSignedInt:
    case WeightKind::kFp32:
      break;
  }
  return PeKind::kMac;
}

LayerParams make_layer_params(QuantizedFilterBank filters, bns::BnsRaw raw,
                              ActFormat input_format, int acc_bits) {
  if (raw.size() != filters.alpha.size()) {
    throw DataError("BNS parameters and filters disagree on the feature count");
  }
  for (std::size_t f = 0; f < raw.size(); ++f) raw[f].alpha = filters.alpha[f];
  LayerParams p;
  p.bns = bns::fold_input_scale(bns::fuse(raw), input_format);
  p.filters = std::move(filters);
  p.raw = std::move(raw);
  p.acc_bits = acc_bits;
  return p;
}

ActFormat ModelBundle::input_format_of(std::size_t layer) const {
  return producer_format(*this, network.geometry(layer).inputs.front());
}

void ModelBundle::validate() const {
  const std::size_t n = network.size();
  if (output_formats.size() != n || params.size() != n) {
    throw DataError("bundle needs one output format and one parameter slot per layer");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const LayerSpec& l = network.layer(i);
    const std::string where = layer_where(*this, i);
    const ActFormat in_fmt = input_format_of(i);
    if (l.kind == LayerKind::kBns) {
      throw DataError(where + "standalone bns layers must be merged into the preceding conv/fc");
    }
    if (l.kind == LayerKind::kMaxPool && output_formats[i] != in_fmt) {
      throw DataError(where + "max-pool cannot change the activation format");
    }
    if (!l.has_weights()) {
      if (params[i]) throw DataError(where + "only conv/fc layers carry parameters");
      continue;
    }
    if (!params[i]) throw DataError(where + "missing filters / BNS parameters");
    const LayerParams& p = *params[i];
    const ConvGeometry g = conv_geometry(network, i);
    p.filters.validate();
    if (p.filters.out_features != g.out.c || p.filters.in_channels != g.in_per_group ||
        p.filters.kernel_h != g.kernel_h || p.filters.kernel_w != g.kernel_w) {
      throw DataError(where + "filter bank shape does not match the layer");
    }
    if (p.bns.size() != static_cast<std::size_t>(g.out.c) || p.bns.beta.size() != p.bns.size()) {
      throw DataError(where + "BNS needs one (gamma, beta) per output feature");
    }
    for (std::size_t f = 0; f < p.bns.size(); ++f) {
      if (!std::isfinite(p.bns.gamma[f]) || !std::isfinite(p.bns.beta[f])) {
        throw DataError(where + "BNS parameters must be finite");
      }
    }
    if (p.raw) {
      if (p.raw->size() != p.bns.size()) throw DataError(where + "raw BNS feature count mismatch");
      for (std::size_t f = 0; f < p.raw->size(); ++f) {
        if ((*p.raw)[f].alpha != p.filters.alpha[f]) {
          throw DataError(where + "raw BNS alpha disagrees with the filter bank");
        }
      }
    }
    if (p.acc_bits != 0 && (p.acc_bits < 2 || p.acc_bits > 63)) {
      throw DataError(where + "accumulator width must be 2..63 bits");
    }
    if (in_fmt.bipolar() && g.padding > 0) {
      throw DataError(where + "zero padding has no bipolar code; use padding 0");
    }
  }
}

QTensor run_layer(const ModelBundle& bundle, std::size_t layer_index,
                  const std::vector<const QTensor*>& inputs, const EngineOptions& options,
                  LayerTrace* trace) {
  const Network& net = bundle.network;
  if (layer_index >= net.size()) throw ContractViolation("layer index out of range");
  const LayerSpec& l = net.layer(layer_index);
  const LayerGeometry& geo = net.geometry(layer_index);
  const std::string where = layer_where(bundle, layer_index);
  if (inputs.size() != geo.inputs.size()) {
    throw DataError(where + "expects " + std::to_string(geo.inputs.size()) + " input tensor(s)");
  }
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const QTensor& t = *inputs[k];
    const Shape3 want = producer_shape(net, geo.inputs[k]);
    const Shape4& s = t.shape();
    if (s.c != want.c || s.h != want.h || s.w != want.w || s.n != inputs[0]->shape().n) {
      throw DataError(where + "input shape " + lpsim::to_string(s) + " does not match " +
                      to_string(want));
    }
    if (t.format() != producer_format(bundle, geo.inputs[k])) {
      throw DataError(where + "input is " + std::to_string(t.format().bits()) +
                      "-bit but the layer expects " +
                      std::to_string(producer_format(bundle, geo.inputs[k]).bits()) + "-bit");
    }
  }

  QTensor out;
  switch (l.kind) {
    case LayerKind::kConv:
    case LayerKind::kFullyConnected:
      out = run_conv(bundle, layer_index, *inputs[0], options, trace);
      break;
    case LayerKind::kMaxPool:
    case LayerKind::kAvgPool:
      out = run_pool(bundle, layer_index, *inputs[0], trace);
      break;
    case LayerKind::kRelu:
    case LayerKind::kQuantize:
      out = run_requantize(bundle, layer_index, *inputs[0]);
      break;
    case LayerKind::kEltwiseAdd:
      out = run_eltwise(bundle, layer_index, *inputs[0], *inputs[1], trace);
      break;
    case LayerKind::kBns:
      throw DataError(where + "standalone bns layers must be merged into the preceding conv/fc");
  }
  if (trace) trace->output = out;
  return out;
}

QTensor run_layer(const ModelBundle& bundle, std::size_t layer_index, const QTensor& input,
                  const EngineOptions& options, LayerTrace* trace) {
  return run_layer(bundle, layer_index, std::vector<const QTensor*>{&input}, options, trace);
}

QTensor run_network(const ModelBundle& bundle, const QTensor& input, const EngineOptions& options,
                    std::vector<LayerTrace>* trace) {
  bundle.validate();
  input.validate();
  const Shape3 want = bundle.network.input();
  if (input.shape().c != want.c || input.shape().h != want.h || input.shape().w != want.w) {
    throw DataError("input tensor " + to_string(input.shape()) + " does not match network input " +
                    to_string(want));
  }
  if (input.format() != bundle.input_format) {
    throw DataError("input tensor format does not match the bundle's input format");
  }
  const std::size_t n = bundle.network.size();
  std::vector<QTensor> outputs(n);
  if (trace) trace->assign(n, LayerTrace{});
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<const QTensor*> ins;
    for (int src : bundle.network.geometry(i).inputs) {
      ins.push_back(src == kNetworkInput ? &input : &outputs[src]);
    }
    outputs[i] = run_layer(bundle, i, ins, options, trace ? &(*trace)[i] : nullptr);
  }
  return n == 0 ? input : outputs.back();
}

RealTensor decode(const QTensor& t) {
  RealTensor r{t.shape(), std::vector<double>(t.codes().size())};
  for (std::size_t k = 0; k < r.values.size(); ++k) r.values[k] = decode_act(t.codes()[k], t.format());
  return r;
}

namespace {

// ReLU then the quantiser for fmt; quantize_act_ref clips at zero itself.
double quantize_ref_value(double v, ActFormat fmt) {
  if (fmt.bipolar()) return v > 0.0 ? 1.0 : -1.0;
  return quantize_act_ref(v, fmt);
}

RealTensor oracle_conv(const ModelBundle& b, std::size_t i, const RealTensor& in,
                       std::vector<double>& pre) {
  const LayerParams& p = *b.params[i];
  if (!p.raw) throw DataError(layer_where(b, i) + "oracle needs unmerged BNS parameters");
  const QuantizedFilterBank& bank = p.filters;
  const ConvGeometry g = conv_geometry(b.network, i);
  const ActFormat out_fmt = b.output_formats[i];
  const bool fc = b.network.layer(i).kind == LayerKind::kFullyConnected;
  RealTensor out{{in.shape.n, g.out.c, g.out.h, g.out.w}, {}};
  out.values.resize(out.shape.size());
  pre.assign(out.values.size(), 0.0);
  const auto value_at = [&](int n, int c, int y, int x) {
    if (fc) return in.values[static_cast<std::size_t>(n) * g.in.c + c];
    return in.values[((static_cast<std::size_t>(n) * g.in.c + c) * g.in.h + y) * g.in.w + x];
  };
  for (int n = 0; n < in.shape.n; ++n) {
    for (int f = 0; f < g.out.c; ++f) {
      const int grp = f / g.out_per_group;
      const bns::BnsFeature& bn = (*p.raw)[f];
      const auto codes = bank.filter(f);
      for (int oy = 0; oy < g.out.h; ++oy) {
        for (int ox = 0; ox < g.out.w; ++ox) {
          double conv = 0.0;
          std::size_t t = 0;
          for (int c = 0; c < g.in_per_group; ++c) {
            for (int ky = 0; ky < g.kernel_h; ++ky) {
              for (int kx = 0; kx < g.kernel_w; ++kx, ++t) {
                const int iy = oy * g.stride - g.padding + ky;
                const int ix = ox * g.stride - g.padding + kx;
                if (iy < 0 || iy >= g.in.h || ix < 0 || ix >= g.in.w) continue;
                const double weight = bn.alpha * bank.format.decode(codes[t]);
                conv += weight * value_at(n, grp * g.in_per_group + c, iy, ix);
              }
            }
          }
          const double normed = (conv - bn.bn_shift) / bn.bn_divisor;
          const double scaled = bn.scale * normed + bn.shift;
          const std::size_t idx =
              ((static_cast<std::size_t>(n) * g.out.c + f) * g.out.h + oy) * g.out.w + ox;
          pre[idx] = scaled;
          out.values[idx] = quantize_ref_value(scaled, out_fmt);
        }
      }
    }
  }
  return out;
}

RealTensor oracle_pool(const ModelBundle& b, std::size_t i, const RealTensor& in,
                       std::vector<double>& pre) {
  const LayerSpec& l = b.network.layer(i);
  const LayerGeometry& geo = b.network.geometry(i);
  const bool is_max = l.kind == LayerKind::kMaxPool;
  RealTensor out{{in.shape.n, geo.out.c, geo.out.h, geo.out.w}, {}};
  out.values.resize(out.shape.size());
  if (!is_max) pre.assign(out.values.size(), 0.0);
  std::size_t idx = 0;
  for (int n = 0; n < out.shape.n; ++n) {
    for (int c = 0; c < out.shape.c; ++c) {
      for (int oy = 0; oy < out.shape.h; ++oy) {
        for (int ox = 0; ox < out.shape.w; ++ox, ++idx) {
          double best = -INFINITY;
          double sum = 0.0;
          int count = 0;
          for (int ky = 0; ky < l.kernel_h; ++ky) {
            const int iy = oy * l.stride - l.padding + ky;
            if (iy < 0 || iy >= geo.in.h) continue;
            for (int kx = 0; kx < l.kernel_w; ++kx) {
              const int ix = ox * l.stride - l.padding + kx;
              if (ix < 0 || ix >= geo.in.w) continue;
              const double v =
                  in.values[((static_cast<std::size_t>(n) * geo.in.c + c) * geo.in.h + iy) *
                                geo.in.w + ix];
              best = std::max(best, v);
              sum += v;
              ++count;
            }
          }
          if (count == 0) throw DataError(layer_where(b, i) + "pooling window sees only padding");
          if (is_max) {
            out.values[idx] = best;
          } else {
            pre[idx] = sum / count;
            out.values[idx] = quantize_ref_value(pre[idx], b.output_formats[i]);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

RealTensor run_reference_fp32(const ModelBundle& bundle, const RealTensor& input,
                              OracleTrace* trace) {
  bundle.validate();
  const Shape3 want = bundle.network.input();
  if (input.shape.c != want.c || input.shape.h != want.h || input.shape.w != want.w ||
      input.values.size() != input.shape.size()) {
    throw DataError("oracle input does not match network input " + to_string(want));
  }
  const std::size_t n = bundle.network.size();
  std::vector<RealTensor> outputs(n);
  if (trace) {
    trace->pre_quant.assign(n, {});
    trace->outputs.clear();
  }
  for (std::size_t i = 0; i < n; ++i) {
    const LayerGeometry& geo = bundle.network.geometry(i);
    const auto src = [&](std::size_t k) -> const RealTensor& {
      return geo.inputs[k] == kNetworkInput ? input : outputs[geo.inputs[k]];
    };
    const ActFormat out_fmt = bundle.output_formats[i];
    std::vector<double> pre;
    switch (bundle.network.layer(i).kind) {
      case LayerKind::kConv:
      case LayerKind::kFullyConnected:
        outputs[i] = oracle_conv(bundle, i, src(0), pre);
        break;
      case LayerKind::kMaxPool:
      case LayerKind::kAvgPool:
        outputs[i] = oracle_pool(bundle, i, src(0), pre);
        break;
      case LayerKind::kRelu:
      case LayerKind::kQuantize:
      case LayerKind::kEltwiseAdd: {
        const RealTensor& a = src(0);
        outputs[i] = RealTensor{a.shape, std::vector<double>(a.values.size())};
        pre.resize(a.values.size());
        for (std::size_t k = 0; k < a.values.size(); ++k) {
          pre[k] = a.values[k] + (geo.inputs.size() == 2 ? src(1).values[k] : 0.0);
          outputs[i].values[k] = quantize_ref_value(pre[k], out_fmt);
        }
        break;
      }
      case LayerKind::kBns:
        throw DataError("standalone bns layers are not supported");
    }
    if (trace) {
      trace->pre_quant[i] = std::move(pre);
      trace->outputs.push_back(outputs[i]);
    }
  }
  return n == 0 ? input : outputs.back();
}

}  // namespace lpsim::engine
