// Copyright 2026 The hshrtf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hshrtf command-line front end.
//
//   hshrtf encode     HRIR-CSV -> HSHC model
//   hshrtf sh-encode  HRIR-CSV -> SHMB per-bin SH model
//   hshrtf decode     HSHC model -> CSV of magnitudes
//   hshrtf compare    raw HRIR-CSV + HSHC + SHMB -> error curves and summary
//   hshrtf info       print a model header
//
// Exit codes: 0 success, 2 usage error, 3 input/parse error, 4 numerical
// failure. Every command that writes files also writes a JSON run manifest.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hshrtf/hshrtf.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitNumerical = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string crc_digest(const std::string& path) {
  const auto bytes = hshrtf::read_file_bytes(path);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "crc32:%08x", hshrtf::crc32(bytes));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Manifest {
  json doc;

  Manifest(const std::string& command, int threads) {
    doc["command"] = command;
    doc["tool_version"] = hshrtf::kVersion;
    doc["timestamp"] = utc_timestamp();
    doc["parameters"] = json::object();
    doc["parameters"]["threads"] = threads;
    doc["inputs"] = json::object();
    doc["outputs"] = json::array();
  }

  void input(const std::string& role, const std::string& path) {
    doc["inputs"][role] = {{"path", path}, {"digest", crc_digest(path)}};
  }

  void output(const std::string& path) { doc["outputs"].push_back(path); }

  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw hshrtf::FormatError(path.string() + ": cannot write manifest");
    out << doc.dump(2) << '\n';
  }
};

// ---------------------------------------------------------------------------

struct EncodeArgs {
  std::string input;
  std::string output;
  int n_max = 80;
  int l_max = 8;
  int m_max = 8;
  bool symmetric = true;
  int drop_bins = 2;
  double taper_start = 20000.0;
  bool weighting = true;
  double db_floor = hshrtf::kDefaultDbFloor;
};

int run_encode(const EncodeArgs& a, int threads) {
  if (a.n_max < a.l_max || a.l_max < a.m_max || a.m_max < 0) {
    throw UsageError("require n_max >= l_max >= m_max >= 0");
  }
  const auto set =
      hshrtf::build_index_set(a.n_max, a.l_max, a.m_max, a.symmetric);
  const auto hrir = hshrtf::load_hrir_set(a.input);
  const auto dataset = hshrtf::magnitude_spectra(hrir, a.db_floor);

  hshrtf::WeightingSpec spec;
  spec.enabled = a.weighting;
  spec.dropped_low_bins = a.weighting ? a.drop_bins : 0;
  spec.taper_start = a.taper_start;
  const auto weights = hshrtf::build_weights(dataset, spec);
  const auto fit = hshrtf::fit_hsh(dataset, set, weights);
  const double nyquist = 0.5 * dataset.sample_rate;

  hshrtf::Provenance prov{
      {"tool", "hshrtf"},
      {"tool.version", hshrtf::kVersion},
      {"source.name", fs::path(a.input).filename().string()},
      {"source.digest", crc_digest(a.input)},
      {"source.directions", std::to_string(dataset.num_directions)},
      {"source.ir_length", std::to_string(hrir.ir_length)},
      {"db_floor", g17(a.db_floor)},
      {"weighting", spec.describe(nyquist)},
      {"weighting.enabled", a.weighting ? "true" : "false"},
      {"weighting.dropped_low_bins", std::to_string(spec.dropped_low_bins)},
      {"weighting.taper_start_hz", g17(spec.taper_start)},
      {"weighting.taper_end_hz", g17(spec.resolved_taper_end(nyquist))},
      {"fit.solver", fit.report.solver},
      {"fit.weighted_rss", g17(fit.report.weighted_rss)},
      {"fit.condition_estimate", g17(fit.report.condition_estimate)},
      {"fit.samples_used", std::to_string(fit.report.num_samples_used)},
  };
  const hshrtf::CoefficientSet model(
      set, {fit.model.coefficients().begin(), fit.model.coefficients().end()},
      dataset.sample_rate, hshrtf::MappingMode::kLinearHalfSphere, prov);
  hshrtf::save_model(model, a.output);

  std::cout << "coefficients: " << fit.report.num_coefficients << "\n"
            << "samples used: " << fit.report.num_samples_used << " of "
            << dataset.size() << "\n"
            << "weighted rss: " << g17(fit.report.weighted_rss) << " dB^2\n"
            << "condition estimate: " << g17(fit.report.condition_estimate)
            << "\n"
            << "solver: " << fit.report.solver << "\n";
  if (fit.report.ill_conditioned()) {
    std::cerr << "warning: normal matrix condition estimate "
              << g17(fit.report.condition_estimate) << " exceeds "
              << g17(hshrtf::kConditionWarning) << "\n";
  }

  Manifest m("encode", threads);
  m.doc["parameters"]["n_max"] = a.n_max;
  m.doc["parameters"]["l_max"] = a.l_max;
  m.doc["parameters"]["m_max"] = a.m_max;
  m.doc["parameters"]["symmetric"] = a.symmetric;
  m.doc["parameters"]["weighting"] = a.weighting;
  m.doc["parameters"]["drop_bins"] = a.drop_bins;
  m.doc["parameters"]["taper_start"] = a.taper_start;
  m.doc["parameters"]["db_floor"] = a.db_floor;
  m.doc["parameters"]["output"] = a.output;
  m.input("hrir", a.input);
  m.output(a.output);
  m.doc["fit_report"] = {
      {"weighted_rss", fit.report.weighted_rss},
      {"condition_estimate", fit.report.condition_estimate},
      {"num_samples_used", fit.report.num_samples_used},
      {"num_coefficients", fit.report.num_coefficients},
      {"solver", fit.report.solver}};
  m.write(a.output + ".manifest.json");
  return kExitOk;
}

struct ShEncodeArgs {
  std::string input;
  std::string output;
  int order = 8;
  double db_floor = hshrtf::kDefaultDbFloor;
};

int run_sh_encode(const ShEncodeArgs& a, int threads) {
  if (a.order < 0) throw UsageError("order must be >= 0");
  const auto hrir = hshrtf::load_hrir_set(a.input);
  const auto dataset = hshrtf::magnitude_spectra(hrir, a.db_floor);
  double cond = 0.0;
  const auto fitted = hshrtf::fit_sh_per_bin(dataset, a.order, &cond);
  hshrtf::Provenance prov{
      {"tool", "hshrtf"},
      {"tool.version", hshrtf::kVersion},
      {"source.name", fs::path(a.input).filename().string()},
      {"source.digest", crc_digest(a.input)},
      {"source.directions", std::to_string(dataset.num_directions)},
      {"source.ir_length", std::to_string(hrir.ir_length)},
      {"db_floor", g17(a.db_floor)},
      {"weighting", "uniform, every bin fitted independently"},
      {"fit.condition_estimate", g17(cond)},
  };
  const hshrtf::ShModel model(fitted.sh_order(), fitted.sample_rate(),
                              fitted.coefficients(), prov);
  hshrtf::save_sh_model(model, a.output);
  std::cout << "bins: " << model.num_bins() << "\n"
            << "coefficients per bin: " << hshrtf::sh_count(a.order) << "\n"
            << "total coefficients: " << model.coefficient_count() << "\n"
            << "condition estimate: " << g17(cond) << "\n";

  Manifest m("sh-encode", threads);
  m.doc["parameters"]["order"] = a.order;
  m.doc["parameters"]["db_floor"] = a.db_floor;
  m.doc["parameters"]["output"] = a.output;
  m.input("hrir", a.input);
  m.output(a.output);
  m.write(a.output + ".manifest.json");
  return kExitOk;
}

// "start:step:end" (inclusive) or a single value.
std::vector<double> parse_range(std::string_view text, const char* axis) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (true) {
    const auto colon = text.find(':', pos);
    const auto tok = text.substr(pos, colon == std::string_view::npos
                                          ? std::string_view::npos
                                          : colon - pos);
    const auto v = hshrtf::detail::parse_double(tok);
    if (!v || !std::isfinite(*v)) {
      throw UsageError(std::string("grid ") + axis + ": bad number '" +
                       std::string(tok) + "'");
    }
    parts.push_back(*v);
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) {
    throw UsageError(std::string("grid ") + axis + ": expected start:step:end");
  }
  const double start = parts[0], step = parts[1], end = parts[2];
  if (!(step > 0.0) || end < start) {
    throw UsageError(std::string("grid ") + axis +
                     ": need step > 0 and end >= start");
  }
  std::vector<double> out;
  const double slack = 1e-9 * step;
  for (long long i = 0;; ++i) {
    const double v = start + static_cast<double>(i) * step;
    if (v > end + slack) break;
    out.push_back(std::min(v, end));
    if (out.size() > 10'000'000) throw UsageError("grid too large");
  }
  return out;
}

struct GridSpec {
  std::vector<double> az, el, freq;
};

// "<az range> x <el range> x <freq range>"; 'x', 'X', U+00D7 or ';' separate.
GridSpec parse_grid(const std::string& spec) {
  std::string norm = spec;
  for (std::size_t p; (p = norm.find("\xC3\x97")) != std::string::npos;) {
    norm.replace(p, 2, ";");
  }
  for (char& c : norm) {
    if (c == 'x' || c == 'X') c = ';';
  }
  std::vector<std::string> axes;
  std::stringstream ss(norm);
  for (std::string part; std::getline(ss, part, ';');) {
    axes.emplace_back(hshrtf::detail::trim(part));
  }
  if (axes.size() != 3) {
    throw UsageError("grid spec needs three ranges: az x el x freq");
  }
  return {parse_range(axes[0], "azimuth"), parse_range(axes[1], "elevation"),
          parse_range(axes[2], "frequency")};
}

struct DecodeArgs {
  std::string model;
  std::string output;
  std::optional<double> az, el, freq;
  std::string grid;
  bool linear = false;
};

int run_decode(const DecodeArgs& a, int threads) {
  GridSpec g;
  if (!a.grid.empty()) {
    if (a.az || a.el || a.freq) {
      throw UsageError("use either --grid or --az/--el/--freq, not both");
    }
    g = parse_grid(a.grid);
  } else {
    if (!a.az || !a.el || !a.freq) {
      throw UsageError("--az, --el and --freq are required without --grid");
    }
    g = {{*a.az}, {*a.el}, {*a.freq}};
  }
  const auto model = hshrtf::load_model(a.model);
  for (double f : g.freq) {
    if (f < 0.0 || f > model.mapping().nyquist()) {
      throw UsageError("frequency " + g17(f) + " Hz outside [0, " +
                       g17(model.mapping().nyquist()) + "] Hz");
    }
  }
  std::vector<hshrtf::SphericalAngles> dirs;
  std::vector<std::pair<double, double>> labels;
  for (double az : g.az) {
    for (double el : g.el) {
      try {
        dirs.push_back(hshrtf::angles_from_az_el(az, el));
      } catch (const hshrtf::InvalidArgument& e) {
        throw UsageError(e.what());
      }
      labels.emplace_back(az, el);
    }
  }
  const Eigen::MatrixXd values = hshrtf::decode_grid(model, dirs, g.freq);

  std::ofstream out(a.output, std::ios::binary | std::ios::trunc);
  if (!out) throw hshrtf::FormatError(a.output + ": cannot open for writing");
  out << "azimuth_deg,elevation_deg,freq_hz,"
      << (a.linear ? "magnitude_linear" : "magnitude_db") << "\n";
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = 0; j < g.freq.size(); ++j) {
      double v = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (a.linear) v = std::pow(10.0, v / 20.0);
      out << g17(labels[i].first) << ',' << g17(labels[i].second) << ','
          << g17(g.freq[j]) << ',' << g17(v) << '\n';
    }
  }
  if (!out) throw hshrtf::FormatError(a.output + ": write failed");
  out.close();

  Manifest m("decode", threads);
  if (a.grid.empty()) {
    m.doc["parameters"]["az"] = *a.az;
    m.doc["parameters"]["el"] = *a.el;
    m.doc["parameters"]["freq"] = *a.freq;
  } else {
    m.doc["parameters"]["grid"] = a.grid;
  }
  m.doc["parameters"]["linear"] = a.linear;
  m.doc["parameters"]["output"] = a.output;
  m.input("model", a.model);
  m.output(a.output);
  m.write(a.output + ".manifest.json");
  return kExitOk;
}

struct CompareArgs {
  std::string raw;
  std::string hsh;
  std::string sh;
  std::string out_dir;
  double f_lo = 100.0;
  double f_hi = 20000.0;
  int drop_bins = 2;
  double db_floor = hshrtf::kDefaultDbFloor;
};

int run_compare(const CompareArgs& a, int threads) {
  const auto hrir = hshrtf::load_hrir_set(a.raw);
  const auto dataset = hshrtf::magnitude_spectra(hrir, a.db_floor);
  const auto hsh = hshrtf::load_model(a.hsh);
  const auto sh = hshrtf::load_sh_model(a.sh);
  hshrtf::ComparisonReport report;
  try {
    report = hshrtf::compare_models(dataset, hsh, sh, a.f_lo, a.f_hi,
                                    a.drop_bins);
  } catch (const hshrtf::InvalidArgument& e) {
    // Mismatched inputs are an input problem, not a usage problem.
    throw hshrtf::ParseError("compare", 0, e.what());
  }
  const auto written = hshrtf::write_report(report, a.out_dir);
  for (const auto& [k, v] : hshrtf::summary_rows(report)) {
    std::cout << k << ": " << v << "\n";
  }

  Manifest m("compare", threads);
  m.doc["parameters"]["f_lo"] = a.f_lo;
  m.doc["parameters"]["f_hi"] = a.f_hi;
  m.doc["parameters"]["drop_bins"] = a.drop_bins;
  m.doc["parameters"]["db_floor"] = a.db_floor;
  m.doc["parameters"]["output_dir"] = a.out_dir;
  m.input("raw", a.raw);
  m.input("hsh_model", a.hsh);
  m.input("sh_model", a.sh);
  for (const auto& p : written) m.output(p.string());
  m.write(fs::path(a.out_dir) / "manifest.json");
  return kExitOk;
}

int run_info(const std::string& path) {
  const auto bytes = hshrtf::read_file_bytes(path);
  const std::string_view magic(reinterpret_cast<const char*>(bytes.data()),
                               std::min<std::size_t>(bytes.size(), 4));
  const hshrtf::Provenance* prov = nullptr;
  std::optional<hshrtf::CoefficientSet> hsh;
  std::optional<hshrtf::ShModel> sh;
  if (magic == hshrtf::kShMagic) {
    sh = hshrtf::deserialize_sh_model(bytes, path);
    std::cout << "format: SHMB v" << hshrtf::kModelFormatVersion << "\n"
              << "sh_order: " << sh->sh_order() << "\n"
              << "num_bins: " << sh->num_bins() << "\n"
              << "sample_rate: " << g17(sh->sample_rate()) << "\n"
              << "coefficients: " << sh->coefficient_count() << "\n";
    prov = &sh->provenance();
  } else {
    hsh = hshrtf::deserialize_coefficient_set(bytes, path);
    const auto& set = hsh->index_set();
    std::cout << "format: HSHC v" << hshrtf::kModelFormatVersion << "\n"
              << "n_max: " << set.n_max() << "\n"
              << "l_max: " << set.l_max() << "\n"
              << "m_max: " << set.m_max() << "\n"
              << "psi_symmetric: " << (set.psi_symmetric() ? "true" : "false")
              << "\n"
              << "sample_rate: " << g17(hsh->sample_rate()) << "\n"
              << "mapping: " << hshrtf::to_string(hsh->mapping_mode()) << "\n"
              << "coefficients: " << set.size() << "\n";
    prov = &hsh->provenance();
  }
  for (const auto& [k, v] : *prov) std::cout << "meta." << k << ": " << v << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperspherical-harmonic HRTF magnitude encoder/decoder"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Upper bound on worker threads")
      ->check(CLI::PositiveNumber);
  app.set_version_flag("--version", std::string(hshrtf::kVersion));

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Fit an HSH model to an HRIR-CSV file");
  encode->add_option("input", enc.input, "HRIR-CSV file")->required();
  encode->add_option("-o,--output", enc.output, "Output HSHC model")->required();
  encode->add_option("--n-max", enc.n_max, "Maximum n")->capture_default_str();
  encode->add_option("--l-max", enc.l_max, "Maximum l")->capture_default_str();
  encode->add_option("--m-max", enc.m_max, "Maximum |m|")->capture_default_str();
  encode->add_flag("--symmetric,!--no-symmetric", enc.symmetric,
                   "Keep only psi-symmetric functions ((n - l) even)");
  encode->add_option("--drop-bins", enc.drop_bins, "Zero-weight low bins")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  encode->add_option("--taper-start", enc.taper_start,
                     "Start of the raised-cosine taper in Hz")
      ->capture_default_str();
  encode->add_flag("!--no-weighting", enc.weighting,
                   "Fit every bin with unit weight");
  encode->add_option("--db-floor", enc.db_floor, "Linear magnitude floor")
      ->check(CLI::PositiveNumber);

  ShEncodeArgs she;
  auto* sh_encode = app.add_subcommand("sh-encode", "Fit per-bin SH models");
  sh_encode->add_option("input", she.input, "HRIR-CSV file")->required();
  sh_encode->add_option("-o,--output", she.output, "Output SHMB model")->required();
  sh_encode->add_option("--order", she.order, "SH order")->capture_default_str();
  sh_encode->add_option("--db-floor", she.db_floor, "Linear magnitude floor")
      ->check(CLI::PositiveNumber);

  DecodeArgs dec;
  auto* decode = app.add_subcommand("decode", "Decode an HSHC model to CSV");
  decode->add_option("model", dec.model, "HSHC model")->required();
  decode->add_option("-o,--output", dec.output, "Output CSV")->required();
  decode->add_option("--az", dec.az, "Azimuth in degrees");
  decode->add_option("--el", dec.el, "Elevation in degrees");
  decode->add_option("--freq", dec.freq, "Frequency in Hz");
  decode->add_option("--grid", dec.grid,
                     "az_start:az_step:az_end x el_start:el_step:el_end x "
                     "f_start:f_step:f_end");
  decode->add_flag("--linear", dec.linear, "Emit 10^(dB/20) instead of dB");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Compare HSH and SH models against raw data");
  compare->add_option("raw", cmp.raw, "HRIR-CSV file")->required();
  compare->add_option("hsh_model", cmp.hsh, "HSHC model")->required();
  compare->add_option("sh_model", cmp.sh, "SHMB model")->required();
  compare->add_option("-o,--output-dir", cmp.out_dir, "Report directory")->required();
  compare->add_option("--f-lo", cmp.f_lo, "SD lower limit in Hz")->capture_default_str();
  compare->add_option("--f-hi", cmp.f_hi, "SD upper limit in Hz")->capture_default_str();
  compare->add_option("--drop-bins", cmp.drop_bins,
                      "Bins ignored by the HSH fit (for size accounting)")
      ->capture_default_str();
  compare->add_option("--db-floor", cmp.db_floor, "Linear magnitude floor")
      ->check(CLI::PositiveNumber);

  std::string info_path;
  auto* info = app.add_subcommand("info", "Print a model header");
  info->add_option("model", info_path, "HSHC or SHMB file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*encode) return run_encode(enc, threads);
    if (*sh_encode) return run_sh_encode(she, threads);
    if (*decode) return run_decode(dec, threads);
    if (*compare) return run_compare(cmp, threads);
    if (*info) return run_info(info_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const hshrtf::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const hshrtf::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const hshrtf::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const hshrtf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}
