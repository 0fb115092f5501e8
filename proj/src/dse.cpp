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

#include "lpsim/dse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lpsim/error.hpp"

namespace lpsim::dse {

void DeviceSpec::validate() const {
  if (dsp_blocks <= 0 || alms <= 0 || !(fmax_hz > 0.0) || m20k_kbits < 0.0 || mlab_kbits < 0.0) {
    throw DataError("device '" + name + "': resource counts and fmax must be positive");
  }
}

DeviceSpec arria10_gx1150() {
  return {"arria10-gx1150", 1518, 427200, 54260.0, 12984.0, 275e6};
}

DeviceSpec stratix10_gx2800() {
  // 229 Mb of M20K and 15 Mb of MLAB, in Kb.
  return {"stratix10-gx2800", 5760, 933120, 229.0 * 1024.0, 15.0 * 1024.0, 600e6};
}

const std::vector<DeviceSpec>& builtin_devices() {
  static const std::vector<DeviceSpec> devices{arria10_gx1150(), stratix10_gx2800()};
  return devices;
}

DeviceSpec find_device(std::span<const DeviceSpec> devices, std::string_view name) {
  for (const DeviceSpec& d : devices) {
    if (d.name == name) return d;
  }
  throw ConfigError("unknown device '" + std::string(name) + "'");
}

void DseParams::validate() const {
  if (!(alm_budget_fraction > 0.0 && alm_budget_fraction <= 1.0)) {
    throw ConfigError("ALM budget fraction must be in (0, 1]");
  }
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
    throw ConfigError("efficiency must be in [0, 1]");
  }
  if (widen < 1 || widen > 3) throw ConfigError("widen factor must be 1, 2 or 3");
}

Projection peak_throughput(const DeviceSpec& dev, const pe::PeConfig& pe, const DseParams& p) {
  dev.validate();
  p.validate();
  Projection out;
  out.device = dev.name;
  out.pe = pe.name();
  out.widen = p.widen;
  if (pe.dsp_bound()) {
    out.dot_units = dev.dsp_blocks;
    out.macs_per_cycle = dev.dsp_blocks;
    out.dsps_used = dev.dsp_blocks;
  } else {
    const bool packing = p.use_dsp_packing && pe.dsp_macs_per_block > 0;
    if (pe.alms_per_dot <= 0 && !packing) {
      throw ConfigError("PE " + pe.name() + " has no ALM cost and no DSP packing: no array");
    }
    if (pe.alms_per_dot > 0) {
      const double budget = std::floor(p.alm_budget_fraction * static_cast<double>(dev.alms));
      out.dot_units = static_cast<std::int64_t>(budget) / pe.alms_per_dot;
    }
    out.alms_used = out.dot_units * pe.alms_per_dot;
    out.macs_per_cycle = out.dot_units * pe.words_per_dot;
    if (packing) {
      out.macs_per_cycle += dev.dsp_blocks * pe.dsp_macs_per_block;
      out.dsps_used = dev.dsp_blocks;
    }
  }
  out.peak_ops_per_sec = 2.0 * static_cast<double>(out.macs_per_cycle) * dev.fmax_hz;
  out.achieved_ops_per_sec = out.peak_ops_per_sec;
  out.eq_tops = out.peak_ops_per_sec / 1e12 / (p.widen * p.widen);
  return out;
}

Projection project(const DeviceSpec& dev, const Network& net, const pe::PeConfig& pe,
                   const DseParams& p) {
  Projection out = peak_throughput(dev, pe, p);
  out.network = net.name();
  out.efficiency = p.efficiency;
  out.achieved_ops_per_sec = out.peak_ops_per_sec * p.efficiency;
  out.eq_tops = out.achieved_ops_per_sec / 1e12 / (p.widen * p.widen);
  const double gops = ops_count(widen(net, p.widen));
  out.images_per_sec = gops > 0.0 ? out.achieved_ops_per_sec / (gops * 1e9) : 0.0;
  return out;
}

std::optional<double> EfficiencyTable::lookup(const pe::PeConfig& pe) const {
  auto it = by_pair.find(pe.pair_name());
  if (it == by_pair.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string accuracy_key(std::string_view network, int widen, std::string_view pair) {
  return std::string(network) + "|" + std::to_string(widen) + "|" + std::string(pair);
}

}  // namespace

void AccuracyTable::set(std::string_view network, int widen, std::string_view pair,
                        std::optional<double> accuracy) {
  if (accuracy && !(*accuracy >= 0.0 && *accuracy <= 1.0)) {
    throw DataError("accuracy must lie in [0, 1]");
  }
  entries_[accuracy_key(network, widen, pair)] = accuracy;
}

std::optional<double> AccuracyTable::lookup(std::string_view network, int widen,
                                            std::string_view pair) const {
  auto it = entries_.find(accuracy_key(network, widen, pair));
  return it == entries_.end() ? std::nullopt : it->second;
}

SortKey parse_sort_key(std::string_view name) {
  if (name == "throughput") return SortKey::kThroughput;
  if (name == "images" || name == "images_per_sec") return SortKey::kImagesPerSec;
  if (name == "eq_tops") return SortKey::kEqTops;
  throw ConfigError("unknown sort key '" + std::string(name) +
                    "' (throughput | images | eq_tops)");
}

std::vector<Projection> explore(const DeviceSpec& dev, const Network& net,
                                std::span<const pe::PeConfig> pe_set, std::span<const int> widen_set,
                                const DseParams& p, SortKey sort, const EfficiencyTable* eta,
                                const AccuracyTable* accuracy) {
  if (pe_set.empty() || widen_set.empty()) {
    throw ConfigError("explore needs at least one PE configuration and one widen factor");
  }
  std::vector<Projection> out;
  out.reserve(pe_set.size() * widen_set.size());
  for (const pe::PeConfig& pe : pe_set) {
    for (int k : widen_set) {
      DseParams q = p;
      q.widen = k;
      if (eta) {
        if (auto e = eta->lookup(pe)) q.efficiency = *e;
      }
      Projection proj = project(dev, net, pe, q);
      if (accuracy) proj.accuracy = accuracy->lookup(net.name(), k, pe.pair_name());
      out.push_back(std::move(proj));
    }
  }
  const auto key = [sort](const Projection& x) {
    switch (sort) {
      case SortKey::kImagesPerSec: return x.images_per_sec;
      case SortKey::kEqTops: return x.eq_tops;
      case SortKey::kThroughput: break;
    }
    return x.achieved_ops_per_sec;
  };
  std::stable_sort(out.begin(), out.end(), [&](const Projection& a, const Projection& b) {
    if (key(a) != key(b)) return key(a) > key(b);
    if (a.pe != b.pe) return a.pe < b.pe;
    return a.widen < b.widen;
  });
  return out;
}

std::vector<FrontierPoint> pareto(std::span<const FrontierPoint> points) {
  std::vector<FrontierPoint> pts;
  for (const FrontierPoint& p : points) {
    if (!p.accuracy) continue;
    if (!std::isfinite(*p.accuracy) || !std::isfinite(p.throughput)) {
      throw ContractViolation("frontier points must be finite");
    }
    pts.push_back(p);
  }
  // Best accuracy first, then best throughput: a point survives iff it beats
  // the throughput of everything with at least its accuracy.
  std::stable_sort(pts.begin(), pts.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    if (*a.accuracy != *b.accuracy) return *a.accuracy > *b.accuracy;
    return a.throughput > b.throughput;
  });
  std::vector<FrontierPoint> frontier;
  for (const FrontierPoint& p : pts) {
    if (frontier.empty() || p.throughput > frontier.back().throughput) frontier.push_back(p);
  }
  std::reverse(frontier.begin(), frontier.end());
  return frontier;
}

Projection regression_arria10_alexnet(const RegressionSetup& setup) {
  return project(setup.device, builtin_network("alexnet"), setup.pe, setup.params);
}

}  // namespace lpsim::dse
