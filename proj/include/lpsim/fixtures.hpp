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

#ifndef LPSIM_FIXTURES_HPP_
#define LPSIM_FIXTURES_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "lpsim/dse.hpp"
#include "lpsim/pe.hpp"

// Loaders for the checked-in table data under fixtures/. Every file is JSON
// with a "provenance" string describing its source.
namespace lpsim::fixtures {

/// $LPNN_FIXTURES when set, else the source tree's fixtures/ directory.
std::filesystem::path default_dir();

nlohmann::json load(const std::string& file, const std::filesystem::path& dir = default_dir());

std::vector<dse::DeviceSpec> devices(const std::filesystem::path& dir = default_dir());
std::vector<pe::PeConfig> pe_table(const std::filesystem::path& dir = default_dir());

/// One (network, widen) column of the ResNet projection table.
struct Table4Cell {
  std::string network;
  int widen = 1;
  std::optional<double> eq_tops;   // nullopt = NR
  std::optional<double> accuracy;  // nullopt = NR
};

struct Table4Row {
  std::string pair;  // "2xT", "fp32", ...
  std::vector<Table4Cell> cells;

  const Table4Cell& cell(const std::string& network, int widen) const;
};

std::vector<Table4Row> table4(const std::filesystem::path& dir = default_dir());

struct Table5Row {
  std::string pair;
  std::string network;
  double s10_b1 = 0.0;
  double tx_b1 = 0.0;
  double tx_b128 = 0.0;
  /// s10_b1 * ops(network) / model peak, frozen alongside the table.
  double eta_prime = 0.0;
};

std::vector<Table5Row> table5(const std::filesystem::path& dir = default_dir());

/// Per-pair efficiency calibrated against the ResNet-34 1x column.
dse::EfficiencyTable calibration_eta(const std::filesystem::path& dir = default_dir());

/// ResNet table accuracies plus the AlexNet figures quoted in the text.
dse::AccuracyTable accuracy_table(const std::filesystem::path& dir = default_dir());

struct AlexnetPoint {
  int widen = 1;
  std::string pair;
  double accuracy = 0.0;
  double images_per_sec = 0.0;
};

std::vector<AlexnetPoint> alexnet_points(const std::filesystem::path& dir = default_dir());
std::vector<dse::FrontierPoint> alexnet_frontier_points(
    const std::filesystem::path& dir = default_dir());

/// Measured Arria 10 design geometry plus its calibrated efficiency.
dse::RegressionSetup regression_setup(const std::filesystem::path& dir = default_dir());

}  // namespace lpsim::fixtures

#endif  // LPSIM_FIXTURES_HPP_
