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

#include <random>

#include "doctest.h"
#include "lpsim/engine.hpp"
#include "lpsim/error.hpp"
#include "lpsim/io.hpp"
#include "toy_models.hpp"

#ifndef LPSIM_TEST_DATA_DIR
#define LPSIM_TEST_DATA_DIR "tests/data"
#endif

namespace lpsim::engine {
namespace {

const std::filesystem::path kData = LPSIM_TEST_DATA_DIR;

LayerSpec conv1x1(const std::string& name, int out) {
  LayerSpec l;
  l.name = name;
  l.kind = LayerKind::kConv;
  l.out_channels = out;
  return l;
}

// One 1x1 conv, one input channel, one feature.
ModelBundle single_conv(const WeightFormat& wf, std::int8_t code, bns::BnsFeature raw, int bits) {
  ModelBundle b;
  b.network = Network("one", {1, 1, 1}, {conv1x1("conv", 1)});
  b.input_format = ActFormat(bits);
  b.output_formats = {ActFormat(bits)};
  QuantizedFilterBank bank;
  bank.format = wf;
  bank.out_features = 1;
  bank.in_channels = 1;
  bank.codes = {code};
  bank.alpha = {raw.alpha};
  b.params = {make_layer_params(bank, {raw}, b.input_format)};
  return b;
}

bns::BnsFeature identity_bn() { return bns::BnsFeature{0.0, 1.0, 1.0, 0.0, 1.0}; }

}  // namespace

TEST_CASE("hand trace of a 1x1 ternary conv") {
  const ModelBundle b = single_conv(WeightFormat::ternary(), 1, identity_bn(), 2);
  CHECK(b.params[0]->bns.gamma[0] == doctest::Approx(1.0 / 3.0));
  CHECK(b.params[0]->bns.beta[0] == 0.0);
  const QTensor in({1, 1, 1, 1}, ActFormat(2), {2});
  LayerTrace t;
  const QTensor out = run_layer(b, 0, in, {}, &t);
  CHECK(t.acc == std::vector<std::int64_t>{2});
  CHECK(t.post_bns[0] == doctest::Approx(2.0 / 3.0));
  CHECK(out.codes()[0] == 2);
  CHECK(t.pe == PeKind::kTernaryMux);
  const RealTensor ref = run_reference_fp32(b, decode(in));
  CHECK(ref.values[0] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("zero weights and zero shift give zero codes") {
  const ModelBundle b = single_conv(WeightFormat::ternary(), 0, identity_bn(), 3);
  for (int c = 0; c <= 7; ++c) {
    CHECK(run_layer(b, 0, QTensor({1, 1, 1, 1}, ActFormat(3), {c})).codes()[0] == 0);
  }
}

TEST_CASE("zero gamma with unit beta saturates") {
  ModelBundle b = single_conv(WeightFormat::ternary(), 1, identity_bn(), 2);
  b.params[0]->bns = bns::BnsFused{{0.0}, {1.0}};
  b.params[0]->raw.reset();
  for (int c = 0; c <= 3; ++c) {
    CHECK(run_layer(b, 0, QTensor({1, 1, 1, 1}, ActFormat(2), {c})).codes()[0] == 3);
  }
}

TEST_CASE("single-layer network equals run_layer") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto tc = toy::random_toy(toy::Variant::kTernaryMux, rng);
    const QTensor a = run_layer(tc.bundle, 0, tc.input);
    ModelBundle one = tc.bundle;
    one.network = Network("one", tc.bundle.network.input(), {tc.bundle.network.layer(0)});
    one.output_formats.resize(1);
    one.params.resize(1);
    CHECK(run_network(one, tc.input) == a);
  }
}

TEST_CASE("mismatched inputs are rejected") {
  const ModelBundle b = single_conv(WeightFormat::ternary(), 1, identity_bn(), 2);
  CHECK_THROWS_AS(run_network(b, QTensor({1, 2, 1, 1}, ActFormat(2))), DataError);
  CHECK_THROWS_AS(run_network(b, QTensor({1, 1, 1, 1}, ActFormat(3))), DataError);
  CHECK_THROWS_AS(run_layer(b, 0, std::vector<const QTensor*>{}), DataError);
}

TEST_CASE("accumulator overflow is reported, not wrapped") {
  ModelBundle b;
  LayerSpec l = conv1x1("conv", 1);
  b.network = Network("wide", {16, 1, 1}, {l});
  b.input_format = ActFormat(8);
  b.output_formats = {ActFormat(8)};
  QuantizedFilterBank bank;
  bank.format = WeightFormat::ternary();
  bank.out_features = 1;
  bank.in_channels = 16;
  bank.codes.assign(16, 1);
  bank.alpha = {1.0};
  b.params = {make_layer_params(bank, {identity_bn()}, b.input_format, 12)};
  const QTensor in({1, 16, 1, 1}, ActFormat(8), std::vector<std::int32_t>(16, 255));
  CHECK_THROWS_AS(run_network(b, in), AccumulatorOverflow);
  b.params[0]->acc_bits = 0;
  CHECK_NOTHROW(run_network(b, in));
}

TEST_CASE("bipolar inputs cannot be zero padded") {
  ModelBundle b;
  LayerSpec l = conv1x1("conv", 2);
  l.kernel_h = l.kernel_w = 3;
  l.padding = 1;
  b.network = Network("pad", {1, 4, 4}, {l});
  b.input_format = ActFormat(1);
  b.output_formats = {ActFormat(1)};
  QuantizedFilterBank bank;
  bank.format = WeightFormat::binary();
  bank.out_features = 2;
  bank.in_channels = 1;
  bank.kernel_h = bank.kernel_w = 3;
  bank.codes.assign(18, 1);
  bank.alpha = {1.0, 1.0};
  b.params = {make_layer_params(bank, {identity_bn(), identity_bn()}, b.input_format)};
  CHECK_THROWS_AS(b.validate(), DataError);
}

TEST_CASE("standalone bns layers are refused") {
  ModelBundle b;
  LayerSpec l;
  l.name = "bn";
  l.kind = LayerKind::kBns;
  b.network = Network("bn", {1, 2, 2}, {l});
  b.output_formats = {ActFormat(8)};
  b.params = {std::nullopt};
  CHECK_THROWS_AS(b.validate(), DataError);
}

TEST_CASE("pe selection") {
  EngineOptions plain;
  EngineOptions packed;
  packed.dsp_packing = true;
  CHECK(select_pe_kind(ActFormat(1), WeightFormat::binary(), plain) == PeKind::kXnorPopcount);
  CHECK(select_pe_kind(ActFormat(8), WeightFormat::binary(), plain) == PeKind::kBinaryMux);
  CHECK(select_pe_kind(ActFormat(2), WeightFormat::ternary(), plain) == PeKind::kTernaryMux);
  CHECK(select_pe_kind(ActFormat(2), WeightFormat::ternary(), packed) == PeKind::kPackedDsp);
  CHECK(select_pe_kind(ActFormat(3), WeightFormat::ternary(), packed) == PeKind::kTernaryMux);
  CHECK(select_pe_kind(ActFormat(4), WeightFormat::signed_int(4), plain) == PeKind::kMac);
}

TEST_CASE("integer pipeline matches the float oracle on random tie-free models") {
  std::mt19937_64 rng(2026);
  for (toy::Variant v : toy::all_variants()) {
    CAPTURE(toy::variant_name(v));
    for (int t = 0; t < 25; ++t) {
      const auto tc = toy::random_toy(v, rng);
      std::vector<LayerTrace> trace;
      const QTensor out = run_network(tc.bundle, tc.input, tc.options, &trace);
      CHECK(trace[0].pe == toy::expected_pe(v));
      OracleTrace ot;
      run_reference_fp32(tc.bundle, decode(tc.input), &ot);
      for (std::size_t i = 0; i < trace.size(); ++i) {
        const RealTensor want = ot.outputs[i];
        CHECK(decode(trace[i].output).values == want.values);
        for (std::int32_t c : trace[i].output.codes()) CHECK(c >= 0);
      }
      CHECK(out == trace.back().output);
    }
  }
}

TEST_CASE("specialised engines agree with plain MAC and across thread counts") {
  std::mt19937_64 rng(99);
  for (toy::Variant v : toy::all_variants()) {
    for (int t = 0; t < 20; ++t) {
      auto tc = toy::random_toy(v, rng);
      const QTensor fast = run_network(tc.bundle, tc.input, tc.options);
      EngineOptions ref = tc.options;
      ref.pe_mode = PeMode::kReference;
      CHECK(run_network(tc.bundle, tc.input, ref) == fast);
      EngineOptions many = tc.options;
      many.threads = 3;
      CHECK(run_network(tc.bundle, tc.input, many) == fast);
      CHECK(run_network(tc.bundle, tc.input, tc.options) == fast);
    }
  }
}

TEST_CASE("engines agree even where the oracle would tie") {
  // No tie filtering here: integer engines share one float BNS step.
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const toy::Variant v = toy::all_variants()[t % 5];
    auto tc = toy::random_toy(v, rng);
    tc.input = toy::random_input(tc.input.shape(), tc.input.format(), rng);
    EngineOptions ref = tc.options;
    ref.pe_mode = PeMode::kReference;
    CHECK(run_network(tc.bundle, tc.input, ref) == run_network(tc.bundle, tc.input, tc.options));
  }
}

TEST_CASE("golden trace of the 3-layer toy model") {
  const ModelBundle b = io::read_bundle(kData / "toy3_bundle.json");
  const QTensor in = io::read_tensor(kData / "toy3_input.lpqt");
  const auto golden = io::read_json(kData / "toy3_golden.json");
  for (auto mode : {PeMode::kSpecialized, PeMode::kReference}) {
    EngineOptions opt;
    opt.pe_mode = mode;
    std::vector<LayerTrace> trace;
    run_network(b, in, opt, &trace);
    REQUIRE(trace.size() == golden["layers"].size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const auto want = golden["layers"][i]["output"].get<std::vector<std::int32_t>>();
      CHECK(std::vector<std::int32_t>(trace[i].output.codes().begin(), trace[i].output.codes().end()) ==
            want);
    }
  }
}

TEST_CASE("max-pool ignores padding and keeps the format") {
  ModelBundle b;
  LayerSpec p;
  p.name = "pool";
  p.kind = LayerKind::kMaxPool;
  p.kernel_h = p.kernel_w = 3;
  p.stride = 2;
  p.padding = 1;
  b.network = Network("mp", {1, 3, 3}, {p});
  b.input_format = ActFormat(1);
  b.output_formats = {ActFormat(1)};
  b.params = {std::nullopt};
  // all -1 inputs: padding must not inject a 0 / +1
  const QTensor out = run_network(b, QTensor({1, 1, 3, 3}, ActFormat(1)));
  for (auto c : out.codes()) CHECK(c == 0);
  b.output_formats = {ActFormat(2)};
  CHECK_THROWS_AS(b.validate(), DataError);
}

TEST_CASE("eltwise add sums decoded branches") {
  ModelBundle b;
  LayerSpec a = conv1x1("a", 1);
  LayerSpec c = conv1x1("b", 1);
  c.inputs = {kNetworkInput};
  LayerSpec add;
  add.name = "add";
  add.kind = LayerKind::kEltwiseAdd;
  add.inputs = {0, 1};
  b.network = Network("res", {1, 1, 1}, {a, c, add});
  b.input_format = ActFormat(2);
  b.output_formats = {ActFormat(2), ActFormat(2), ActFormat(2)};
  QuantizedFilterBank bank;
  bank.format = WeightFormat::ternary();
  bank.out_features = 1;
  bank.in_channels = 1;
  bank.codes = {1};
  bank.alpha = {1.0};
  b.params = {make_layer_params(bank, {identity_bn()}, b.input_format),
              make_layer_params(bank, {identity_bn()}, b.input_format), std::nullopt};
  // 1/3 + 1/3 = 2/3, and 2/3 + 2/3 clips at 1
  CHECK(run_network(b, QTensor({1, 1, 1, 1}, ActFormat(2), {1})).codes()[0] == 2);
  CHECK(run_network(b, QTensor({1, 1, 1, 1}, ActFormat(2), {2})).codes()[0] == 3);
}

}  // namespace lpsim::engine
