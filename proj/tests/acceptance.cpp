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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lpsim/bns.hpp"
#include "lpsim/dse.hpp"
#include "lpsim/engine.hpp"
#include "lpsim/error.hpp"
#include "lpsim/fixtures.hpp"
#include "lpsim/netgraph.hpp"
#include "lpsim/numerics.hpp"
#include "lpsim/pe.hpp"
#include "toy_models.hpp"

namespace {

using namespace lpsim;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

using Acts = std::vector<std::int32_t>;
using Codes = std::vector<std::int8_t>;

Outcome quantizer_equivalence() {
  Outcome o;
  long mismatches = 0;
  for (int bits = 2; bits <= 8; ++bits) {
    const ActFormat f(bits);
    for (int i = 0; i < 10000; ++i) {
      const double x = -0.5 + 2.0 * i / 9999.0;
      // negative inputs go through the ReLU the code path expects its caller to apply
      const double via_code = static_cast<double>(quantize_activation(x, f)) / f.levels();
      if (via_code != quantize_act_ref(x, f)) ++mismatches;
      if (x >= 0.0 && quantize_act_code(x, f) != quantize_activation(x, f)) ++mismatches;
    }
  }
  bool rejects_negative = false;
  try {
    quantize_act_code(-0.25, ActFormat(2));
  } catch (const ContractViolation&) {
    rejects_negative = true;
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  o.require(rejects_negative, "negative input accepted by the code path");
  if (o.pass) o.detail = "70000 points on [-0.5, 1.5], 0 mismatches";
  return o;
}

Outcome pe_equivalence() {
  Outcome o;
  long mismatches = 0;
  long cases = 0;
  for (int a = 0; a < 256; ++a) {
    for (int w = 0; w < 256; ++w) {
      Acts ac(8), ab(8);
      Codes wc(8), wv(8);
      for (int i = 0; i < 8; ++i) {
        ac[i] = (a >> i) & 1;
        ab[i] = 2 * ac[i] - 1;
        wc[i] = static_cast<std::int8_t>((w >> i) & 1);
        wv[i] = static_cast<std::int8_t>(2 * wc[i] - 1);
      }
      mismatches += pe::dot_xnor_popcount(ac, wc) != pe::dot_ref(ab, wv);
      ++cases;
    }
  }
  for (int a = 0; a < 256; ++a) {
    Acts ac(4);
    for (int i = 0; i < 4; ++i) ac[i] = (a >> (2 * i)) & 3;
    for (int w = 0; w < 81; ++w) {
      Codes wc(4);
      for (int i = 0, r = w; i < 4; ++i, r /= 3) wc[i] = static_cast<std::int8_t>(r % 3 - 1);
      mismatches += pe::dot_ternary_mux(ac, wc) != pe::dot_ref(ac, wc);
      ++cases;
    }
  }
  std::mt19937_64 rng(2026);
  for (int t = 0; t < 100000; ++t) {
    const int bits = 1 + static_cast<int>(rng() % 8);
    const int n = 1 + static_cast<int>(rng() % 256);
    Acts ac(n), ab(n);
    Codes tern(n), bin(n), binv(n);
    for (int i = 0; i < n; ++i) {
      ac[i] = static_cast<std::int32_t>(rng() % (1u << bits));
      ab[i] = 2 * (ac[i] & 1) - 1;
      tern[i] = static_cast<std::int8_t>(static_cast<int>(rng() % 3) - 1);
      bin[i] = static_cast<std::int8_t>(rng() % 2);
      binv[i] = static_cast<std::int8_t>(2 * bin[i] - 1);
    }
    if (bits == 1) {
      mismatches += pe::dot_xnor_popcount(ac, bin) != pe::dot_ref(ab, binv);
      cases += 1;
    } else {
      mismatches += pe::dot_ternary_mux(ac, tern) != pe::dot_ref(ac, tern);
      mismatches += pe::dot_binary_mux(ac, bin) != pe::dot_ref(ac, binv);
      cases += 2;
    }
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  if (o.pass) o.detail = std::to_string(cases) + " cases, 0 mismatches";
  return o;
}

Outcome packed_dsp() {
  Outcome o;
  long mismatches = 0;
  long cases = 0;
  for (int v = 0; v < 256; ++v) {
    const pe::LaneCodes lanes{v & 3, (v >> 2) & 3, (v >> 4) & 3, (v >> 6) & 3};
    const auto packed = pe::pack_dsp_operand(lanes);
    for (int w = -1; w <= 1; ++w) {
      const auto got = pe::dsp_packed_multiply(packed, w, pe::DspWeightMode::kTernary);
      for (int i = 0; i < 4; ++i) mismatches += got[i] != lanes[i] * w;
      ++cases;
    }
    for (int w = -2; w <= 1; ++w) {
      const auto got = pe::dsp_packed_multiply(packed, w, pe::DspWeightMode::kSigned2);
      for (int i = 0; i < 4; ++i) mismatches += got[i] != lanes[i] * w;
      ++cases;
    }
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " lane mismatches");
  if (o.pass) o.detail = std::to_string(cases) + " tuple/weight cases incl. signed 2-bit, 0 mismatches";
  return o;
}

Outcome bns_fusion() {
  Outcome o;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(0.01, 5.0);
  std::uniform_real_distribution<double> uv(-1048576.0, 1048576.0);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    bns::BnsFeature p;
    p.bn_shift = u(rng);
    p.bn_divisor = pos(rng);
    p.scale = u(rng);
    p.shift = u(rng);
    p.alpha = pos(rng);
    const bns::BnsFused f = bns::fuse({p});
    const double v = uv(rng);
    const double want = bns::apply_unfused(v, p);
    const double got = f.gamma[0] * v + f.beta[0];
    const double rel = want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
    worst = std::max(worst, rel);
  }
  o.require(worst <= 1e-6, "worst relative error " + fmt("%.3g", worst));
  if (o.pass) o.detail = "10000 draws, worst relative error " + fmt("%.3g", worst);
  return o;
}

Outcome gop_bits_check() {
  Outcome o;
  const double fp = lpsim::gop_bits(1.44, 32, 32);
  const double low = lpsim::gop_bits(1.44, 2, 2);
  const double wide = lpsim::gop_bits(4 * 1.44, 2, 2);
  o.require(std::abs(fp - 92.16) <= 1e-9, "fp32 " + fmt("%.6f", fp));
  o.require(std::abs(low - 5.76) <= 1e-9, "2xT " + fmt("%.6f", low));
  o.require(std::abs(wide - 23.04) <= 1e-9, "2x 2xT " + fmt("%.6f", wide));
  const Network alex = builtin_network("alexnet");
  const double ops = ops_count(alex);
  o.require(std::abs(ops - 1.44) <= 0.05, "alexnet ops " + fmt("%.5f", ops));
  if (o.pass) {
    o.detail = "92.16/5.76/23.04 at 1.44 GOPs; topology ops " + fmt("%.5f", ops) +
               " GOPs, exact 2x-wide topology " + fmt("%.4f", lpsim::gop_bits(widen(alex, 2), 2, 2)) +
               " GOP-bits";
  }
  return o;
}

Outcome table4_reproduction() {
  Outcome o;
  const dse::DeviceSpec s10 = dse::stratix10_gx2800();
  const auto eta = fixtures::calibration_eta();
  const auto cal = fixtures::load("calibration_eta.json");
  double worst = 0.0;
  int rows = 0;
  for (const auto& row : fixtures::table4()) {
    const double reported = *row.cell("resnet34", 1).eq_tops;
    if (row.pair == "fp32") {
      const double peak = dse::peak_throughput(s10, pe::fp32_config(), {}).peak_ops_per_sec / 1e12;
      o.require(std::abs(peak / 7.0 - 1.0) <= 0.05, "fp32 peak " + fmt("%.3f", peak));
      continue;
    }
    const auto pe = pe::select_pe(pe::pe_catalog(), row.pair);
    const auto e = eta.lookup(pe);
    if (!e) {
      o.require(false, "no eta for " + row.pair);
      continue;
    }
    o.require(*e >= 0.45 && *e <= 0.70, row.pair + " eta " + fmt("%.4f", *e));
    const double peak = dse::peak_throughput(s10, pe, {}).peak_ops_per_sec / 1e12;
    const double err = std::abs(*e * peak / reported - 1.0);
    worst = std::max(worst, err);
    o.require(err <= 0.10, row.pair + " off by " + fmt("%.3f", err));
    ++rows;
  }
  for (const auto& p : cal.at("pairs")) {
    o.require(!p.at("derivation").get<std::string>().empty(),
              "missing derivation for " + p.at("pair").get<std::string>());
  }
  o.require(rows == 8, std::to_string(rows) + " low-precision rows");
  if (o.pass) o.detail = "8 rows, worst error " + fmt("%.4f", worst) + ", fp32 peak 6.912";
  return o;
}

Outcome widening_normalization() {
  Outcome o;
  const dse::DeviceSpec s10 = dse::stratix10_gx2800();
  const Network r34 = builtin_network("resnet34");
  auto pes = pe::pe_catalog();
  pes.push_back(pe::fp32_config());
  int checked = 0;
  for (const auto& pe : pes) {
    dse::DseParams p;
    p.efficiency = 0.55;
    const double achieved1 = dse::project(s10, r34, pe, p).achieved_ops_per_sec / 1e12;
    for (int k : {2, 3}) {
      p.widen = k;
      const double eq = dse::project(s10, r34, pe, p).eq_tops;
      o.require(eq == achieved1 / (k * k), pe.name() + " x" + std::to_string(k));
      ++checked;
    }
  }
  if (o.pass) o.detail = std::to_string(checked) + " (pe, widen) rows exact";
  return o;
}

Outcome arria10_regression() {
  Outcome o;
  const auto s = fixtures::regression_setup();
  const dse::Projection r = dse::regression_arria10_alexnet(s);
  const double ratio = r.images_per_sec / s.measured_images_per_sec;
  o.require(std::abs(ratio - 1.0) <= 0.25, "ratio " + fmt("%.4f", ratio));
  o.require(s.device.alms == 150000 && s.params.use_dsp_packing && s.device.fmax_hz == 275e6,
            "fixture geometry");
  // measured images/sec times the nominal 1.44 GOPs against the reported 4.9
  const double implied = s.measured_images_per_sec * 1.44 / 1e3;
  o.require(std::abs(implied - 5.33) <= 0.005, "implied " + fmt("%.4f", implied));
  o.require(implied > s.reported_tops * 1.05, "tension absent");
  if (o.pass) {
    o.detail = fmt("%.1f", r.images_per_sec) + " img/s vs 3700 (ratio " + fmt("%.4f", ratio) +
               "); implied " + fmt("%.3f", implied) + " TOPs vs reported " +
               fmt("%.1f", s.reported_tops);
  }
  return o;
}

Outcome engine_equivalence() {
  Outcome o;
  std::mt19937_64 rng(9090);
  int models = 0;
  for (toy::Variant v : toy::all_variants()) {
    int bad = 0;
    for (int t = 0; t < 100; ++t) {
      const auto tc = toy::random_toy(v, rng);
      std::vector<engine::LayerTrace> trace;
      const QTensor out = engine::run_network(tc.bundle, tc.input, tc.options, &trace);
      const engine::RealTensor want = engine::run_reference_fp32(tc.bundle, engine::decode(tc.input));
      if (engine::decode(out).values != want.values || trace[0].pe != toy::expected_pe(v)) ++bad;
      ++models;
    }
    o.require(bad == 0, std::string(toy::variant_name(v)) + " " + std::to_string(bad) + " mismatches");
  }
  if (o.pass) o.detail = std::to_string(models) + " models over 5 PE variants, exact";
  return o;
}

bool dominated(const dse::FrontierPoint& p, const std::vector<dse::FrontierPoint>& pts) {
  return std::any_of(pts.begin(), pts.end(), [&](const dse::FrontierPoint& q) {
    return (*q.accuracy >= *p.accuracy && q.throughput > p.throughput) ||
           (*q.accuracy > *p.accuracy && q.throughput >= p.throughput);
  });
}

Outcome frontier() {
  Outcome o;
  std::mt19937_64 rng(77);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + static_cast<int>(rng() % 50);
    std::vector<dse::FrontierPoint> pts;
    for (int i = 0; i < n; ++i) {
      pts.push_back({static_cast<double>(rng() % 20) / 20.0, static_cast<double>(rng() % 40),
                     std::to_string(i)});
    }
    std::vector<std::pair<double, double>> want;
    for (const auto& p : pts) {
      const std::pair<double, double> key{*p.accuracy, p.throughput};
      if (!dominated(p, pts) && std::find(want.begin(), want.end(), key) == want.end()) {
        want.push_back(key);
      }
    }
    std::sort(want.begin(), want.end());
    std::vector<std::pair<double, double>> got;
    for (const auto& p : dse::pareto(pts)) got.emplace_back(*p.accuracy, p.throughput);
    bad += got != want;
  }
  o.require(bad == 0, std::to_string(bad) + " random sets differ");
  const auto f = dse::pareto(fixtures::alexnet_frontier_points());
  std::vector<std::string> schemes;
  for (const auto& p : f) {
    const std::string s = p.label.substr(0, p.label.find(' '));
    if (std::find(schemes.begin(), schemes.end(), s) == schemes.end()) schemes.push_back(s);
  }
  o.require(schemes.size() >= 2, "alexnet frontier has " + std::to_string(schemes.size()) + " scheme");
  if (o.pass) {
    o.detail = "1000 random sets match; alexnet frontier widths:";
    for (const auto& s : schemes) o.detail += " " + s;
  }
  return o;
}

Outcome fixture_round_trip() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "lpsim_acceptance_fixtures";
  fs::create_directories(dir);
  for (const auto& e : fs::directory_iterator(fixtures::default_dir())) {
    if (e.path().extension() != ".json") continue;
    const auto j = fixtures::load(e.path().filename().string());
    std::ofstream(dir / e.path().filename()) << j.dump(1);
    o.require(fixtures::load(e.path().filename().string(), dir) == j,
              e.path().filename().string() + " differs");
  }
  const auto a = fixtures::table4();
  const auto b = fixtures::table4(dir);
  o.require(a.size() == b.size(), "table4 rows");
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    for (std::size_t c = 0; c < a[i].cells.size(); ++c) {
      o.require(a[i].cells[c].eq_tops == b[i].cells[c].eq_tops &&
                    a[i].cells[c].accuracy == b[i].cells[c].accuracy,
                "table4 " + a[i].pair);
    }
  }
  const auto t5a = fixtures::table5();
  const auto t5b = fixtures::table5(dir);
  o.require(t5a.size() == t5b.size(), "table5 rows");
  for (std::size_t i = 0; i < std::min(t5a.size(), t5b.size()); ++i) {
    o.require(t5a[i].s10_b1 == t5b[i].s10_b1 && t5a[i].tx_b1 == t5b[i].tx_b1 &&
                  t5a[i].tx_b128 == t5b[i].tx_b128 && t5a[i].eta_prime == t5b[i].eta_prime,
              "table5 " + t5a[i].pair + " " + t5a[i].network);
  }
  // frozen eta' stays consistent with the throughput model
  const dse::DeviceSpec s10 = dse::stratix10_gx2800();
  const auto widest = pe::widest_per_pair(pe::pe_catalog());
  for (const auto& r : t5a) {
    const pe::PeConfig pe = r.pair == "fp32" ? pe::fp32_config() : pe::select_pe(widest, r.pair);
    const double peak = dse::peak_throughput(s10, pe, {}).peak_ops_per_sec;
    const double eta = r.s10_b1 * ops_count(builtin_network(r.network)) * 1e9 / peak;
    o.require(std::abs(eta - r.eta_prime) <= 5e-7, "eta' " + r.pair + " " + r.network);
  }
  const auto pa = fixtures::alexnet_points();
  const auto pb = fixtures::alexnet_points(dir);
  o.require(pa.size() == pb.size(), "alexnet points");
  for (std::size_t i = 0; i < std::min(pa.size(), pb.size()); ++i) {
    o.require(pa[i].accuracy == pb[i].accuracy && pa[i].images_per_sec == pb[i].images_per_sec,
              "alexnet point " + std::to_string(i));
  }
  fs::remove_all(dir);
  if (o.pass) {
    o.detail = "accuracies and GPU columns are fixture data only (trained models needed); "
               "round-trip exact";
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = no runtime limit
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "quantizer equivalence", 1.0, quantizer_equivalence},
      {2, "pe oracle equivalence", 10.0, pe_equivalence},
      {3, "packed dsp exactness", 1.0, packed_dsp},
      {4, "bns fusion", 0.0, bns_fusion},
      {5, "gop-bits", 0.0, gop_bits_check},
      {6, "resnet-34 eq tops reproduction", 1.0, table4_reproduction},
      {7, "widening normalization", 0.0, widening_normalization},
      {8, "arria 10 regression", 0.0, arria10_regression},
      {9, "engine equivalence", 30.0, engine_equivalence},
      {10, "frontier correctness", 0.0, frontier},
      {11, "desk-scale limits, fixture round-trip", 0.0, fixture_round_trip},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += " (runtime " + fmt("%.2f", secs) + " s over " + fmt("%.0f", c.budget_s) + " s)";
    }
    std::printf("%s %2d %s: %s [%.3f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    failures += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
