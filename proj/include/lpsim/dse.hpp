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

#ifndef LPSIM_DSE_HPP_
#define LPSIM_DSE_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpsim/netgraph.hpp"
#include "lpsim/pe.hpp"

namespace lpsim::dse {

struct DeviceSpec {
  std::string name;
  std::int64_t dsp_blocks = 0;
  std::int64_t alms = 0;
  // Memory is reported only; nothing in the model is constrained by it.
  double m20k_kbits = 0.0;
  double mlab_kbits = 0.0;
  double fmax_hz = 0.0;

  void validate() const;
};

/// Arria 10 GX 1150 at its measured ~275 MHz.
DeviceSpec arria10_gx1150();
/// Stratix 10 GX 2800 at the 600 MHz projection clock.
DeviceSpec stratix10_gx2800();
const std::vector<DeviceSpec>& builtin_devices();
DeviceSpec find_device(std::span<const DeviceSpec> devices, std::string_view name);

struct DseParams {
  /// Share of the device ALMs the PE array may occupy.
  double alm_budget_fraction = 0.80;
  /// Achieved / peak when the topology maps onto the array.
  double efficiency = 1.0;
  bool use_dsp_packing = false;
  int widen = 1;

  void validate() const;
};

struct Projection {
  std::string device;
  std::string network;
  std::string pe;
  int widen = 1;
  double efficiency = 1.0;
  std::int64_t dot_units = 0;
  std::int64_t macs_per_cycle = 0;
  double peak_ops_per_sec = 0.0;
  double achieved_ops_per_sec = 0.0;
  /// Achieved TOPS divided by widen^2: throughput in units of the 1x network.
  double eq_tops = 0.0;
  double images_per_sec = 0.0;
  std::int64_t alms_used = 0;
  std::int64_t dsps_used = 0;
  std::optional<double> accuracy;  // nullopt = not reported
};

/// Array size and peak rate. ALM-built PEs: floor(budget * alms / alms_per_dot)
/// dot units of words_per_dot MACs, plus dsp_macs_per_block per DSP block when
/// packing is on. FP32: one MAC per DSP block. Peak = 2 * MACs/cycle * fmax.
Projection peak_throughput(const DeviceSpec& dev, const pe::PeConfig& pe, const DseParams& p);

/// Peak scaled by efficiency, normalised by widen^2, and converted to images
/// per second with the op count of the widened network.
Projection project(const DeviceSpec& dev, const Network& net, const pe::PeConfig& pe,
                   const DseParams& p);

/// Calibrated efficiency per (activation, weight) pair, keyed by pair name.
struct EfficiencyTable {
  std::map<std::string, double> by_pair;

  std::optional<double> lookup(const pe::PeConfig& pe) const;
};

/// Top-1 accuracy per (network, widen, pair). Missing entries read as NR.
class AccuracyTable {
 public:
  void set(std::string_view network, int widen, std::string_view pair,
           std::optional<double> accuracy);
  std::optional<double> lookup(std::string_view network, int widen, std::string_view pair) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::optional<double>> entries_;
};

enum class SortKey { kThroughput, kImagesPerSec, kEqTops };

SortKey parse_sort_key(std::string_view name);

/// Every (pe, widen) combination, sorted by `sort` descending with ties broken
/// by PE name then widen. Per-pair efficiencies from `eta` override
/// p.efficiency; `accuracy` fills Projection::accuracy.
std::vector<Projection> explore(const DeviceSpec& dev, const Network& net,
                                std::span<const pe::PeConfig> pe_set, std::span<const int> widen_set,
                                const DseParams& p, SortKey sort,
                                const EfficiencyTable* eta = nullptr,
                                const AccuracyTable* accuracy = nullptr);

struct FrontierPoint {
  std::optional<double> accuracy;
  double throughput = 0.0;
  std::string label;
};

/// Points no other point dominates, sorted by accuracy ascending (so
/// throughput strictly decreases). NR points are dropped; exact duplicates
/// collapse to the first occurrence.
std::vector<FrontierPoint> pareto(std::span<const FrontierPoint> points);

/// Geometry of the measured Arria 10 AlexNet 2xT design.
struct RegressionSetup {
  DeviceSpec device;  // alms pinned to the design's footprint
  pe::PeConfig pe;
  DseParams params;
  double measured_images_per_sec = 0.0;
  double reported_tops = 0.0;
};

/// Arria 10 GX 1150 running AlexNet 1x on 2xT/64 PEs with DSP packing.
Projection regression_arria10_alexnet(const RegressionSetup& setup);

}  // namespace lpsim::dse

#endif  // LPSIM_DSE_HPP_
