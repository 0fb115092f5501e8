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

#include <cmath>
#include <random>

#include "doctest.h"
#include "lpsim/bns.hpp"
#include "lpsim/error.hpp"

namespace lpsim::bns {
namespace {

BnsFeature feature(double w, double x, double y, double z, double alpha) {
  BnsFeature f;
  f.bn_shift = w;
  f.bn_divisor = x;
  f.scale = y;
  f.shift = z;
  f.alpha = alpha;
  return f;
}

BnsFeature random_feature(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(0.01, 5.0);
  return feature(u(rng), pos(rng), u(rng), u(rng), pos(rng));
}

}  // namespace

TEST_CASE("fuse examples") {
  const auto f = fuse({feature(0.5, 2.0, 3.0, 1.0, 2.0)});
  CHECK(f.gamma[0] == doctest::Approx(3.0));
  CHECK(f.beta[0] == doctest::Approx(0.25));
  const auto id = fuse({feature(0, 1, 1, 0, 1)});
  CHECK(id.gamma[0] == 1.0);
  CHECK(id.beta[0] == 0.0);
  CHECK_THROWS_AS(fuse({feature(0, 0, 1, 0, 1)}), DataError);
  CHECK_THROWS_AS(fuse({feature(0, 1, 1, 0, 0)}), ContractViolation);
  CHECK_THROWS_AS(fuse({feature(0, 1, 1, 0, -1)}), ContractViolation);
}

TEST_CASE("fold_input_scale examples") {
  const BnsFused f{{3.0}, {0.25}};
  const auto g = fold_input_scale(f, ActFormat(2));
  CHECK(g.gamma[0] == doctest::Approx(1.0));
  CHECK(g.beta[0] == 0.25);
  const auto z = fold_input_scale(BnsFused{{0.0}, {0.0}}, ActFormat(5));
  CHECK(z.gamma[0] == 0.0);
  CHECK(z.beta[0] == 0.0);
  const auto b = fold_input_scale(BnsFused{{1.0}, {0.5}}, ActFormat(1));
  CHECK(b.gamma[0] == 1.0);
  CHECK(b.beta[0] == 0.5);
}

TEST_CASE("apply examples") {
  const BnsFused f{{1.0, 2.0, 7.5}, {0.25, 0.0, -1.5}};
  CHECK(apply(6, f, 0) == 6.25f);
  CHECK(apply(0, f, 2) == -1.5f);
  CHECK(apply(-3, f, 1) == -6.0f);
  CHECK_THROWS_AS(apply(1, f, 3), ContractViolation);
}

TEST_CASE("apply rounds like single precision") {
  // 1/3 is not representable; the float product differs from the double one.
  const BnsFused f{{1.0 / 3.0}, {0.0}};
  CHECK(apply(3, f, 0) == static_cast<float>(1.0 / 3.0) * 3.0f);
}

TEST_CASE("fused and unfused pipelines agree") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uv(-1048576.0, 1048576.0);
  for (int t = 0; t < 10000; ++t) {
    const BnsFeature p = random_feature(rng);
    const BnsFused f = fuse({p});
    const double v = std::round(uv(rng));
    const double want = apply_unfused(v, p);
    const double got = f.gamma[0] * v + f.beta[0];
    CHECK(std::abs(got - want) <= 1e-6 * std::abs(want));
    // float32 hardware path: error bounded by the size of its terms
    const double hw = apply(static_cast<std::int64_t>(v), f, 0);
    CHECK(std::abs(hw - want) <= 1e-6 * (std::abs(f.gamma[0] * v) + std::abs(f.beta[0])));
  }
}

TEST_CASE("folding the code scale equals decoding first") {
  std::mt19937_64 rng(23);
  for (int bits = 2; bits <= 8; ++bits) {
    const ActFormat fmt(bits);
    std::uniform_int_distribution<int> code(-64 * fmt.levels(), 64 * fmt.levels());
    for (int t = 0; t < 1000; ++t) {
      const BnsFused f = fuse({random_feature(rng)});
      const BnsFused folded = fold_input_scale(f, fmt);
      const std::int64_t acc = code(rng);
      const double real = f.gamma[0] * (static_cast<double>(acc) / fmt.levels()) + f.beta[0];
      const double exact = folded.gamma[0] * static_cast<double>(acc) + folded.beta[0];
      CHECK(std::abs(exact - real) <= 1e-12 * (std::abs(real) + std::abs(f.beta[0]) + 1.0));
      const double hw = apply(acc, folded, 0);
      CHECK(std::abs(hw - real) <=
            1e-6 * (std::abs(folded.gamma[0] * acc) + std::abs(folded.beta[0])));
    }
  }
}

TEST_CASE("threshold decisions do not depend on where alpha is applied") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> ut(-2.0, 2.0);
  std::uniform_int_distribution<int> acc(-500, 500);
  int disagreements = 0;
  for (int t = 0; t < 10000; ++t) {
    const BnsFeature p = random_feature(rng);
    const double th = ut(rng);
    const double v = acc(rng);
    // fused: alpha inside gamma; separate: alpha scales the accumulator first
    const BnsFused f = fuse({p});
    const double fused = f.gamma[0] * v + f.beta[0] - th;
    const double separate = p.scale * ((p.alpha * v - p.bn_shift) / p.bn_divisor) + p.shift - th;
    if (std::abs(separate) < 1e-9) continue;
    disagreements += (fused > 0) != (separate > 0);
  }
  CHECK(disagreements == 0);
}

}  // namespace lpsim::bns
