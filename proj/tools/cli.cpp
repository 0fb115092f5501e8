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

#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "lpsim/dse.hpp"
#include "lpsim/engine.hpp"
#include "lpsim/error.hpp"
#include "lpsim/fixtures.hpp"
#include "lpsim/io.hpp"
#include "lpsim/netgraph.hpp"
#include "lpsim/numerics.hpp"
#include "lpsim/pe.hpp"

namespace lpsim::cli {

namespace {

using ojson = nlohmann::ordered_json;

// Malformed user input that is not a model or tensor problem (exit 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string number_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s(buf);
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  return s == "-0" ? "0" : s;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<ojson>> rows;
};

std::string cell_text(const ojson& v) {
  if (v.is_null()) return "NR";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  return number_text(v.get<double>());
}

void emit(const Table& t, const std::string& format, std::ostream& os) {
  if (format == "json") {
    ojson arr = ojson::array();
    for (const auto& row : t.rows) {
      ojson obj = ojson::object();
      for (std::size_t i = 0; i < t.header.size(); ++i) obj[t.header[i]] = row[i];
      arr.push_back(std::move(obj));
    }
    os << arr.dump(2) << "\n";
    return;
  }
  const char sep = format == "tsv" ? '\t' : ',';
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? std::string(1, sep) : "") << t.header[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? std::string(1, sep) : "") << cell_text(row[i]);
    os << "\n";
  }
}

// Writes to `path` when set, else to `out`.
template <typename F>
void with_output(const std::string& path, std::ostream& out, F&& body) {
  if (path.empty()) {
    body(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  body(f);
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError(std::string("bad ") + what + " list '" + text + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// ---- quantize ----

struct QuantizeArgs {
  std::string input;
  std::string output;
  int bits = 2;
};

void cmd_quantize(const QuantizeArgs& a, std::ostream& out) {
  std::ifstream in(a.input);
  if (!in) throw UsageError("cannot open " + a.input);
  const ActFormat fmt(a.bits);
  std::vector<std::int32_t> codes;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(x)) {
      throw UsageError(a.input + ":" + std::to_string(n) + ": not a finite number: '" + t + "'");
    }
    codes.push_back(quantize_activation(x, fmt));
  }
  with_output(a.output, out, [&](std::ostream& os) {
    for (std::int32_t c : codes) os << c << "\n";
  });
}

// ---- simulate ----

struct SimulateArgs {
  std::string bundle;
  std::string input;
  std::string output;
  std::string trace;
  std::string pe_mode = "specialized";
  bool oracle = false;
  bool dsp_packing = false;
  bool packed = false;
  int threads = 1;
};

std::int32_t oracle_code(double v, ActFormat fmt) {
  if (fmt.bipolar()) return v > 0.0 ? 1 : 0;
  return static_cast<std::int32_t>(std::lround(v * fmt.levels()));
}

void cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const engine::ModelBundle bundle = io::read_bundle(a.bundle);
  const QTensor input = io::read_tensor(a.input);
  engine::EngineOptions opt;
  opt.pe_mode = a.pe_mode == "reference" ? engine::PeMode::kReference : engine::PeMode::kSpecialized;
  opt.dsp_packing = a.dsp_packing;
  opt.threads = a.threads;

  std::vector<engine::LayerTrace> trace;
  const QTensor result = engine::run_network(bundle, input, opt, a.trace.empty() ? nullptr : &trace);
  if (!a.output.empty()) io::write_tensor(a.output, result, a.packed);

  if (!a.trace.empty()) {
    ojson layers = ojson::array();
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const auto& t = trace[i];
      const Shape4& s = t.output.shape();
      ojson lj{{"name", bundle.network.layer(i).name},
               {"kind", std::string(to_string(bundle.network.layer(i).kind))},
               {"shape", {s.n, s.c, s.h, s.w}},
               {"bits", t.output.format().bits()}};
      if (bundle.network.layer(i).has_weights()) lj["pe"] = engine::to_string(t.pe);
      if (!t.acc.empty()) lj["acc"] = t.acc;
      if (!t.post_bns.empty()) lj["post_bns"] = t.post_bns;
      lj["output"] = std::vector<std::int32_t>(t.output.codes().begin(), t.output.codes().end());
      layers.push_back(std::move(lj));
    }
    std::ofstream f(a.trace);
    if (!f) throw DataError("cannot write " + a.trace);
    f << ojson{{"layers", layers}}.dump(1) << "\n";
  }

  const Shape4& s = result.shape();
  out << "output " << s.n << "x" << s.c << "x" << s.h << "x" << s.w << " bits "
      << result.format().bits() << "\n";
  if (a.output.empty()) {
    out << "codes";
    for (std::int32_t c : result.codes()) out << " " << c;
    out << "\n";
  }
  if (a.oracle) {
    const engine::RealTensor ref = engine::run_reference_fp32(bundle, engine::decode(input));
    std::size_t match = 0;
    for (std::size_t k = 0; k < result.codes().size(); ++k) {
      if (oracle_code(ref.values[k], result.format()) == result.codes()[k]) ++match;
    }
    out << "oracle " << match << "/" << result.codes().size() << " match\n";
  }
}

// ---- explore ----

struct ExploreArgs {
  std::string device = "stratix10-gx2800";
  std::string device_file;
  std::string network = "resnet34";
  std::string pe = "all";
  std::string pe_file;
  std::string wide = "1";
  std::string eta = "calibrated";
  double budget = 0.80;
  bool dsp_packing = false;
  std::string sort = "throughput";
  std::string format = "csv";
  std::string output;
};

std::vector<dse::DeviceSpec> device_list(const std::string& file) {
  if (file.empty()) return dse::builtin_devices();
  return io::devices_from_json(io::read_json(file));
}

std::vector<pe::PeConfig> pe_list(const std::string& spec, const std::string& file) {
  const std::vector<pe::PeConfig> catalog =
      file.empty() ? pe::pe_catalog() : io::pe_catalog_from_json(io::read_json(file));
  if (spec == "all") {
    std::vector<pe::PeConfig> out = catalog;
    out.push_back(pe::fp32_config());
    return out;
  }
  std::vector<pe::PeConfig> out;
  for (const std::string& name : split(spec, ',')) out.push_back(pe::select_pe(catalog, name));
  if (out.empty()) throw ConfigError("empty --pe list");
  return out;
}

std::vector<int> widen_list(const std::string& text) {
  std::vector<int> out = parse_int_list(text, "--wide");
  for (int k : out) {
    if (k < 1 || k > 3) throw ConfigError("widen factors must be 1, 2 or 3");
  }
  return out;
}

// Resolves --eta: "calibrated" reads the fixture table, a number overrides.
std::optional<dse::EfficiencyTable> eta_option(const std::string& eta, dse::DseParams& p) {
  if (eta == "calibrated") return fixtures::calibration_eta();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(eta.data(), eta.data() + eta.size(), v);
  if (ec != std::errc() || ptr != eta.data() + eta.size()) {
    throw ConfigError("--eta takes a number in [0, 1] or 'calibrated'");
  }
  p.efficiency = v;
  return std::nullopt;
}

Table projection_table(const std::vector<dse::Projection>& rows) {
  Table t;
  t.header = {"device", "network", "pe", "widen", "eta", "dots", "macs_per_cycle", "peak_tops",
              "achieved_tops", "eq_tops", "images_per_sec", "accuracy", "alms", "dsps"};
  for (const dse::Projection& r : rows) {
    t.rows.push_back({r.device, r.network, r.pe, r.widen, r.efficiency, r.dot_units,
                      r.macs_per_cycle, r.peak_ops_per_sec / 1e12, r.achieved_ops_per_sec / 1e12,
                      r.eq_tops, r.images_per_sec,
                      r.accuracy ? ojson(*r.accuracy) : ojson(nullptr), r.alms_used, r.dsps_used});
  }
  return t;
}

void cmd_explore(const ExploreArgs& a, std::ostream& out) {
  const auto devices = device_list(a.device_file);
  const dse::DeviceSpec dev = dse::find_device(devices, a.device);
  const Network net = io::load_network(a.network);
  const auto pes = pe_list(a.pe, a.pe_file);
  const auto wides = widen_list(a.wide);
  const dse::SortKey sort = dse::parse_sort_key(a.sort);
  dse::DseParams p;
  p.alm_budget_fraction = a.budget;
  p.use_dsp_packing = a.dsp_packing;
  const auto eta = eta_option(a.eta, p);
  p.validate();
  const dse::AccuracyTable acc = fixtures::accuracy_table();
  const auto rows = dse::explore(dev, net, pes, wides, p, sort, eta ? &*eta : nullptr, &acc);
  with_output(a.output, out, [&](std::ostream& os) { emit(projection_table(rows), a.format, os); });
}

// ---- frontier ----

struct FrontierArgs {
  std::string network = "alexnet";
  std::string points_from = "fixtures";
  std::string device = "stratix10-gx2800";
  std::string wide = "1,2,3";
  std::string format = "csv";
  std::string output;
};

std::vector<dse::FrontierPoint> fixture_points(const std::string& network) {
  if (network == "alexnet") return fixtures::alexnet_frontier_points();
  std::vector<dse::FrontierPoint> pts;
  for (const fixtures::Table4Row& row : fixtures::table4()) {
    for (const fixtures::Table4Cell& c : row.cells) {
      if (c.network != network || !c.eq_tops) continue;
      pts.push_back({c.accuracy, *c.eq_tops, std::to_string(c.widen) + "x " + row.pair});
    }
  }
  if (pts.empty()) throw ConfigError("no fixture points for network '" + network + "'");
  return pts;
}

std::vector<dse::FrontierPoint> file_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::vector<dse::FrontierPoint> pts;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t.rfind("accuracy", 0) == 0) continue;
    const auto f = split(t, ',');
    if (f.size() < 2 || f.size() > 3) {
      throw DataError(path + ":" + std::to_string(n) + ": expected accuracy,throughput[,label]");
    }
    dse::FrontierPoint p;
    p.label = f.size() == 3 ? trim(f[2]) : "";
    const std::string acc = trim(f[0]);
    if (acc != "NR") {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(acc.data(), acc.data() + acc.size(), v);
      if (ec != std::errc() || ptr != acc.data() + acc.size() || !std::isfinite(v)) {
        throw DataError(path + ":" + std::to_string(n) + ": bad accuracy '" + acc + "'");
      }
      p.accuracy = v;
    }
    const std::string tp = trim(f[1]);
    auto [ptr, ec] = std::from_chars(tp.data(), tp.data() + tp.size(), p.throughput);
    if (ec != std::errc() || ptr != tp.data() + tp.size() || !std::isfinite(p.throughput)) {
      throw DataError(path + ":" + std::to_string(n) + ": bad throughput '" + tp + "'");
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

void cmd_frontier(const FrontierArgs& a, std::ostream& out) {
  std::vector<dse::FrontierPoint> pts;
  if (a.points_from == "fixtures") {
    pts = fixture_points(a.network);
  } else if (a.points_from == "explore") {
    const dse::DeviceSpec dev = dse::find_device(dse::builtin_devices(), a.device);
    const Network net = io::load_network(a.network);
    const auto eta = fixtures::calibration_eta();
    const auto acc = fixtures::accuracy_table();
    const auto pes = pe_list("all", "");
    const auto wides = widen_list(a.wide);
    for (const dse::Projection& r :
         dse::explore(dev, net, pes, wides, {}, dse::SortKey::kImagesPerSec, &eta, &acc)) {
      pts.push_back({r.accuracy, r.images_per_sec, std::to_string(r.widen) + "x " + r.pe});
    }
  } else {
    pts = file_points(a.points_from);
  }
  Table t;
  t.header = {"label", "accuracy", "throughput"};
  for (const dse::FrontierPoint& p : dse::pareto(pts)) t.rows.push_back({p.label, *p.accuracy, p.throughput});
  with_output(a.output, out, [&](std::ostream& os) { emit(t, a.format, os); });
}

// ---- regression ----

struct RegressionArgs {
  std::string format = "csv";
  std::string output;
};

void cmd_regression(const RegressionArgs& a, std::ostream& out) {
  const dse::RegressionSetup s = fixtures::regression_setup();
  const dse::Projection r = dse::regression_arria10_alexnet(s);
  const double gops = ops_count(builtin_network("alexnet"));
  const double ratio = r.images_per_sec / s.measured_images_per_sec;
  Table t;
  t.header = {"device", "pe", "alms", "fmax_mhz", "dots", "macs_per_cycle", "peak_tops",
              "eta", "achieved_tops", "images_per_sec", "measured_images_per_sec", "ratio",
              "measured_implied_tops", "reported_tops", "within_25pct"};
  t.rows.push_back({r.device, r.pe, s.device.alms, s.device.fmax_hz / 1e6, r.dot_units,
                    r.macs_per_cycle, r.peak_ops_per_sec / 1e12, r.efficiency,
                    r.achieved_ops_per_sec / 1e12, r.images_per_sec, s.measured_images_per_sec,
                    ratio, s.measured_images_per_sec * gops / 1e3, s.reported_tops,
                    std::abs(ratio - 1.0) <= 0.25});
  with_output(a.output, out, [&](std::ostream& os) { emit(t, a.format, os); });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-precision CNN datapath simulator and FPGA design-space modeler", "lpsim"};
  app.require_subcommand(1);
  const std::vector<std::string> formats{"csv", "json", "tsv"};

  QuantizeArgs qa;
  auto* quantize = app.add_subcommand("quantize", "Quantize real values (one per line) to activation codes");
  quantize->add_option("input", qa.input, "Text file of values")->required();
  quantize->add_option("-b,--bits", qa.bits, "Activation bits")->required()->check(CLI::Range(1, 8));
  quantize->add_option("-o,--output", qa.output, "Output file (default stdout)");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a model bundle on an LPQT tensor");
  simulate->add_option("--bundle", sa.bundle, "Model bundle JSON")->required();
  simulate->add_option("--input", sa.input, "Input LPQT tensor")->required();
  simulate->add_option("-o,--output", sa.output, "Output LPQT tensor");
  simulate->add_flag("--packed", sa.packed, "Write the output with sub-byte packing");
  simulate->add_option("--trace", sa.trace, "Write a per-layer JSON trace");
  simulate->add_flag("--oracle", sa.oracle, "Also run the float oracle and count matching codes");
  simulate->add_option("--pe-mode", sa.pe_mode, "specialized | reference")
      ->check(CLI::IsMember({"specialized", "reference"}));
  simulate->add_flag("--dsp-packing", sa.dsp_packing, "Use the packed DSP engine for 2-bit x ternary");
  simulate->add_option("--threads", sa.threads, "Worker threads per layer")->check(CLI::Range(1, 256));

  ExploreArgs ea;
  auto* explore = app.add_subcommand("explore", "Project throughput over PE configurations and widths");
  explore->add_option("--device", ea.device, "Device name");
  explore->add_option("--device-file", ea.device_file, "Device table JSON");
  explore->add_option("--network", ea.network, "Built-in network name or topology JSON");
  explore->add_option("--pe", ea.pe, "all, or comma-separated PE names (2xT/64, 2xT, fp32)");
  explore->add_option("--pe-file", ea.pe_file, "PE catalogue JSON");
  explore->add_option("--wide", ea.wide, "Comma-separated widen factors");
  explore->add_option("--eta", ea.eta, "Efficiency in [0,1] or 'calibrated'");
  explore->add_option("--budget", ea.budget, "ALM budget fraction");
  explore->add_flag("--dsp-packing", ea.dsp_packing, "Count packed DSP multiplies");
  explore->add_option("--sort", ea.sort, "throughput | images | eq_tops");
  explore->add_option("--format", ea.format, "Output format")->check(CLI::IsMember(formats));
  explore->add_option("-o,--output", ea.output, "Output file (default stdout)");

  FrontierArgs fa;
  auto* frontier = app.add_subcommand("frontier", "Accuracy/throughput Pareto frontier");
  frontier->add_option("--network", fa.network, "Network name");
  frontier->add_option("--points-from", fa.points_from, "fixtures | explore | CSV file");
  frontier->add_option("--device", fa.device, "Device for --points-from explore");
  frontier->add_option("--wide", fa.wide, "Widen factors for --points-from explore");
  frontier->add_option("--format", fa.format, "Output format")->check(CLI::IsMember(formats));
  frontier->add_option("-o,--output", fa.output, "Output file (default stdout)");

  RegressionArgs ra;
  auto* regression = app.add_subcommand("regression", "Arria 10 AlexNet 2xT regression");
  regression->add_option("--format", ra.format, "Output format")->check(CLI::IsMember(formats));
  regression->add_option("-o,--output", ra.output, "Output file (default stdout)");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*quantize) cmd_quantize(qa, out);
    if (*simulate) cmd_simulate(sa, out);
    if (*explore) cmd_explore(ea, out);
    if (*frontier) cmd_frontier(fa, out);
    if (*regression) cmd_regression(ra, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace lpsim::cli
