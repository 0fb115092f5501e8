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

#include "lpsim/fixtures.hpp"

#include <cstdlib>

#include "lpsim/error.hpp"
#include "lpsim/io.hpp"

#ifndef LPSIM_DEFAULT_FIXTURE_DIR
#define LPSIM_DEFAULT_FIXTURE_DIR "fixtures"
#endif

namespace lpsim::fixtures {

using nlohmann::json;

namespace {

std::optional<double> nullable(const json& v) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw DataError("expected a number or null, got " + v.dump());
  return v.get<double>();
}

const json& member(const json& j, const char* key, const std::string& file) {
  if (!j.contains(key)) throw DataError(file + ": missing '" + key + "'");
  return j.at(key);
}

template <typename T>
T get(const json& j, const char* key, const std::string& file) {
  try {
    return member(j, key, file).get<T>();
  } catch (const json::exception& e) {
    throw DataError(file + ": bad '" + key + "': " + e.what());
  }
}

}  // namespace

std::filesystem::path default_dir() {
  if (const char* env = std::getenv("LPNN_FIXTURES"); env && *env) return env;
  return LPSIM_DEFAULT_FIXTURE_DIR;
}

json load(const std::string& file, const std::filesystem::path& dir) {
  json j = io::read_json(dir / file);
  if (!j.is_object() || !j.contains("provenance")) {
    throw DataError(file + ": fixture has no provenance");
  }
  return j;
}

std::vector<dse::DeviceSpec> devices(const std::filesystem::path& dir) {
  return io::devices_from_json(load("table1_devices.json", dir));
}

std::vector<pe::PeConfig> pe_table(const std::filesystem::path& dir) {
  return io::pe_catalog_from_json(load("table2_pe_catalog.json", dir));
}

const Table4Cell& Table4Row::cell(const std::string& network, int widen) const {
  for (const Table4Cell& c : cells) {
    if (c.network == network && c.widen == widen) return c;
  }
  throw DataError("table4 row " + pair + " has no column " + network + " " +
                  std::to_string(widen) + "x");
}

std::vector<Table4Row> table4(const std::filesystem::path& dir) {
  const std::string file = "table4_resnet.json";
  const json j = load(file, dir);
  struct Column {
    std::string network;
    int widen;
  };
  std::vector<Column> columns;
  for (const json& c : member(j, "columns", file)) {
    columns.push_back({get<std::string>(c, "network", file), get<int>(c, "widen", file)});
  }
  std::vector<Table4Row> rows;
  for (const json& r : member(j, "rows", file)) {
    Table4Row row;
    row.pair = get<std::string>(r, "pair", file);
    const json& tops = member(r, "eq_tops", file);
    const json& acc = member(r, "accuracy", file);
    if (tops.size() != columns.size() || acc.size() != columns.size()) {
      throw DataError(file + ": row " + row.pair + " does not match the column list");
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
      row.cells.push_back({columns[i].network, columns[i].widen, nullable(tops[i]), nullable(acc[i])});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Table5Row> table5(const std::filesystem::path& dir) {
  const std::string file = "table5_s10_vs_titanx.json";
  const json j = load(file, dir);
  std::vector<Table5Row> rows;
  for (const json& r : member(j, "rows", file)) {
    Table5Row row;
    row.pair = get<std::string>(r, "pair", file);
    row.network = get<std::string>(r, "network", file);
    row.s10_b1 = get<double>(r, "s10_b1", file);
    row.tx_b1 = get<double>(r, "tx_b1", file);
    row.tx_b128 = get<double>(r, "tx_b128", file);
    row.eta_prime = get<double>(r, "eta_prime", file);
    rows.push_back(std::move(row));
  }
  return rows;
}

dse::EfficiencyTable calibration_eta(const std::filesystem::path& dir) {
  const std::string file = "calibration_eta.json";
  const json j = load(file, dir);
  dse::EfficiencyTable t;
  for (const json& r : member(j, "pairs", file)) {
    const double eta = get<double>(r, "eta", file);
    if (!(eta >= 0.0 && eta <= 1.0)) throw DataError(file + ": eta outside [0, 1]");
    t.by_pair[get<std::string>(r, "pair", file)] = eta;
  }
  return t;
}

std::vector<AlexnetPoint> alexnet_points(const std::filesystem::path& dir) {
  const std::string file = "accuracy_alexnet.json";
  const json j = load(file, dir);
  std::vector<AlexnetPoint> out;
  for (const json& r : member(j, "points", file)) {
    AlexnetPoint p;
    p.widen = get<int>(r, "widen", file);
    p.pair = get<std::string>(r, "pair", file);
    p.accuracy = get<double>(r, "accuracy", file);
    p.images_per_sec = get<double>(r, "images_per_sec", file);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<dse::FrontierPoint> alexnet_frontier_points(const std::filesystem::path& dir) {
  std::vector<dse::FrontierPoint> out;
  for (const AlexnetPoint& p : alexnet_points(dir)) {
    out.push_back({p.accuracy, p.images_per_sec, std::to_string(p.widen) + "x " + p.pair});
  }
  return out;
}

dse::AccuracyTable accuracy_table(const std::filesystem::path& dir) {
  dse::AccuracyTable t;
  for (const Table4Row& row : table4(dir)) {
    for (const Table4Cell& c : row.cells) t.set(c.network, c.widen, row.pair, c.accuracy);
  }
  for (const AlexnetPoint& p : alexnet_points(dir)) t.set("alexnet", p.widen, p.pair, p.accuracy);
  return t;
}

dse::RegressionSetup regression_setup(const std::filesystem::path& dir) {
  const std::string file = "table3_arria10_alexnet.json";
  const json j = load(file, dir);
  dse::RegressionSetup s;
  s.device = dse::find_device(devices(dir), get<std::string>(j, "device", file));
  s.device.alms = get<std::int64_t>(j, "alms", file);
  s.device.fmax_hz = get<double>(j, "fmax_mhz", file) * 1e6;
  s.pe = pe::select_pe(pe_table(dir), get<std::string>(j, "pe", file));
  s.params.alm_budget_fraction = get<double>(j, "alm_budget_fraction", file);
  s.params.use_dsp_packing = get<bool>(j, "dsp_packing", file);
  s.params.widen = 1;
  s.measured_images_per_sec = get<double>(j, "images_per_sec", file);
  s.reported_tops = get<double>(j, "reported_tops", file);

  const std::string cal = "calibration_eta.json";
  const json c = load(cal, dir);
  s.params.efficiency = get<double>(member(c, "arria10_alexnet", cal), "eta", cal);
  s.params.validate();
  return s;
}

}  // namespace lpsim::fixtures
