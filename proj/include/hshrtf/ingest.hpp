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

// HRIR-CSV loading and conversion of impulse responses to dB magnitude
// samples on the half-hypersphere.
//
// HRIR-CSV v1 (UTF-8, LF or CRLF line endings):
//
//   # hrir-csv v1
//   # fs=44100
//   # n=512
//   azimuth_deg,elevation_deg,s_0,s_1,...,s_{n-1}
//   ...
//
// The version line comes first; the fs and n lines may follow in either
// order. Other '#' lines are comments. One row per direction, one ear per
// file.

#ifndef HSHRTF_INGEST_HPP_
#define HSHRTF_INGEST_HPP_

#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hshrtf/coords.hpp"
#include "hshrtf/error.hpp"

namespace hshrtf {

// 2^-52, the default lower bound on linear magnitude before conversion to dB.
inline constexpr double kDefaultDbFloor = std::numeric_limits<double>::epsilon();

struct AzEl {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
};

struct HrirSet {
  double sample_rate = 0.0;
  int ir_length = 0;
  std::vector<AzEl> directions;
  // num_directions x ir_length.
  Eigen::MatrixXd impulses;

  std::size_t num_directions() const { return directions.size(); }
};

namespace detail {

// Key used to detect repeated directions: azimuth wrapped to [0, 360),
// with every azimuth at the poles collapsing onto one point.
inline std::pair<double, double> direction_key(const AzEl& d) {
  if (std::abs(d.elevation_deg) >= 90.0) return {0.0, d.elevation_deg};
  double az = std::fmod(d.azimuth_deg, 360.0);
  if (az < 0.0) az += 360.0;
  if (az >= 360.0) az = 0.0;
  return {az, d.elevation_deg};
}

}  // namespace detail

/// Throws InvalidArgument describing the first violated HrirSet invariant.
inline void validate(const HrirSet& set) {
  if (!(set.sample_rate > 0.0) || !std::isfinite(set.sample_rate)) {
    throw InvalidArgument("HRIR set: sample rate must be positive");
  }
  if (set.ir_length < 2 || set.ir_length % 2 != 0) {
    throw InvalidArgument("HRIR set: ir_length must be even and >= 2");
  }
  if (set.directions.empty()) {
    throw InvalidArgument("HRIR set: no directions");
  }
  if (static_cast<std::size_t>(set.impulses.rows()) != set.directions.size() ||
      set.impulses.cols() != set.ir_length) {
    throw InvalidArgument("HRIR set: impulse matrix shape mismatch");
  }
  std::map<std::pair<double, double>, std::size_t> seen;
  for (std::size_t i = 0; i < set.directions.size(); ++i) {
    auto [it, inserted] =
        seen.emplace(detail::direction_key(set.directions[i]), i);
    if (!inserted) {
      throw InvalidArgument("HRIR set: direction " + std::to_string(i) +
                            " duplicates direction " +
                            std::to_string(it->second));
    }
  }
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

inline std::optional<long long> parse_integer(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

}  // namespace detail

/// Parses HRIR-CSV text. `source` names the input in error messages.
inline HrirSet parse_hrir_csv(std::istream& in,
                              const std::string& source = "<stream>") {
  std::string raw;
  std::size_t line_no = 0;
  bool have_version = false;
  std::optional<long long> fs;
  std::optional<long long> n;
  std::vector<AzEl> dirs;
  std::vector<double> values;
  std::map<std::pair<double, double>, std::size_t> seen;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = detail::trim(raw);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (line.empty()) continue;

    if (line.front() == '#') {
      std::string_view body = detail::trim(line.substr(1));
      if (!have_version) {
        if (body != "hrir-csv v1") {
          throw ParseError(source, line_no,
                           "expected '# hrir-csv v1' version line, got '" +
                               std::string(line) + "'");
        }
        have_version = true;
        continue;
      }
      if (body.starts_with("fs=")) {
        if (fs) throw ParseError(source, line_no, "repeated fs header");
        fs = detail::parse_integer(body.substr(3));
        if (!fs || *fs <= 0) {
          throw ParseError(source, line_no, "fs must be a positive integer");
        }
      } else if (body.starts_with("n=")) {
        if (n) throw ParseError(source, line_no, "repeated n header");
        n = detail::parse_integer(body.substr(2));
        if (!n || *n < 2 || *n % 2 != 0) {
          throw ParseError(source, line_no,
                           "n must be an even integer >= 2");
        }
      }
      continue;
    }

    if (!have_version) {
      throw ParseError(source, line_no, "missing '# hrir-csv v1' header");
    }
    if (!fs || !n) {
      throw ParseError(source, line_no,
                       "data row before both fs and n headers");
    }

    const std::size_t expected = static_cast<std::size_t>(*n) + 2;
    std::size_t field = 0;
    std::size_t pos = 0;
    AzEl dir;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::string_view tok = line.substr(
          pos, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - pos);
      if (field < expected) {
        const auto v = detail::parse_double(tok);
        if (!v) {
          throw ParseError(source, line_no,
                           "field " + std::to_string(field + 1) +
                               " is not a number: '" + std::string(tok) + "'");
        }
        if (!std::isfinite(*v)) {
          throw ParseError(source, line_no,
                           "field " + std::to_string(field + 1) +
                               " is not finite");
        }
        if (field == 0) {
          dir.azimuth_deg = *v;
        } else if (field == 1) {
          dir.elevation_deg = *v;
        } else {
          values.push_back(*v);
        }
      }
      ++field;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (field != expected) {
      throw ParseError(source, line_no,
                       "row has " + std::to_string(field >= 2 ? field - 2 : 0) +
                           " samples, expected " + std::to_string(*n));
    }
    if (!(dir.elevation_deg >= -90.0 - kAngleSlack &&
          dir.elevation_deg <= 90.0 + kAngleSlack)) {
      throw ParseError(source, line_no, "elevation outside [-90, 90]");
    }
    auto [it, inserted] = seen.emplace(detail::direction_key(dir), line_no);
    if (!inserted) {
      throw ParseError(source, line_no,
                       "duplicate direction (first seen on line " +
                           std::to_string(it->second) + ")");
    }
    dirs.push_back(dir);
  }

  if (!have_version) throw ParseError(source, 0, "empty file");
  if (!fs || !n) throw ParseError(source, 0, "missing fs or n header");
  if (dirs.empty()) throw ParseError(source, 0, "no data rows");

  HrirSet set;
  set.sample_rate = static_cast<double>(*fs);
  set.ir_length = static_cast<int>(*n);
  set.directions = std::move(dirs);
  set.impulses = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(set.directions.size()),
      set.ir_length);
  return set;
}

inline HrirSet load_hrir_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return parse_hrir_csv(in, path);
}

/// Writes `set` as HRIR-CSV with round-trip precision.
inline void write_hrir_csv(std::ostream& out, const HrirSet& set) {
  validate(set);
  out << "# hrir-csv v1\n";
  out << "# fs=" << static_cast<long long>(set.sample_rate) << "\n";
  out << "# n=" << set.ir_length << "\n";
  char buf[64];
  auto put = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
  };
  for (std::size_t i = 0; i < set.directions.size(); ++i) {
    put(set.directions[i].azimuth_deg);
    out << ',';
    put(set.directions[i].elevation_deg);
    for (int t = 0; t < set.ir_length; ++t) {
      out << ',';
      put(set.impulses(static_cast<Eigen::Index>(i), t));
    }
    out << '\n';
  }
}

struct MagnitudeSample {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;
  double h_db = 0.0;
  int bin_index = 0;
  int direction_index = 0;
};

// dB magnitudes over the full direction x bin product, direction-major:
// samples[d * num_bins + b].
struct MagnitudeDataset {
  std::vector<MagnitudeSample> samples;
  int num_directions = 0;
  int num_bins = 0;
  double sample_rate = 0.0;

  std::size_t size() const { return samples.size(); }
  int ir_length() const { return 2 * (num_bins - 1); }

  double bin_frequency(int k) const {
    return static_cast<double>(k) * sample_rate /
           static_cast<double>(ir_length());
  }

  std::vector<double> bin_frequencies() const {
    std::vector<double> f(static_cast<std::size_t>(num_bins));
    for (int k = 0; k < num_bins; ++k) f[static_cast<std::size_t>(k)] = bin_frequency(k);
    return f;
  }

  const MagnitudeSample& at(int direction, int bin) const {
    return samples[static_cast<std::size_t>(direction) *
                       static_cast<std::size_t>(num_bins) +
                   static_cast<std::size_t>(bin)];
  }

  /// num_directions x num_bins matrix of h_db.
  Eigen::MatrixXd magnitudes() const {
    Eigen::MatrixXd m(num_directions, num_bins);
    for (int d = 0; d < num_directions; ++d) {
      for (int b = 0; b < num_bins; ++b) m(d, b) = at(d, b).h_db;
    }
    return m;
  }

  std::vector<SphericalAngles> directions() const {
    std::vector<SphericalAngles> out(static_cast<std::size_t>(num_directions));
    for (int d = 0; d < num_directions; ++d) {
      out[static_cast<std::size_t>(d)] = {at(d, 0).phi, at(d, 0).theta};
    }
    return out;
  }

  /// True when samples follow the direction-major product layout with
  /// consistent angles per direction and per bin.
  bool is_product_grid() const {
    if (num_directions <= 0 || num_bins <= 0) return false;
    if (samples.size() != static_cast<std::size_t>(num_directions) *
                              static_cast<std::size_t>(num_bins)) {
      return false;
    }
    for (int d = 0; d < num_directions; ++d) {
      for (int b = 0; b < num_bins; ++b) {
        const MagnitudeSample& s = at(d, b);
        if (s.direction_index != d || s.bin_index != b) return false;
        if (s.phi != at(d, 0).phi || s.theta != at(d, 0).theta) return false;
        if (s.psi != at(0, b).psi) return false;
      }
    }
    return true;
  }
};

/// Builds a product-grid dataset from a num_directions x num_bins matrix of
/// dB values. Bin k sits at f_k = k fs / (2 (num_bins - 1)).
inline MagnitudeDataset dataset_from_grid(double sample_rate,
                                          std::span<const SphericalAngles> dirs,
                                          const Eigen::MatrixXd& values_db) {
  if (values_db.rows() != static_cast<Eigen::Index>(dirs.size())) {
    throw InvalidArgument("dataset_from_grid: row count != directions");
  }
  if (values_db.cols() < 2) {
    throw InvalidArgument("dataset_from_grid: need at least two bins");
  }
  const FrequencyMapping mapping(sample_rate);
  MagnitudeDataset ds;
  ds.num_directions = static_cast<int>(dirs.size());
  ds.num_bins = static_cast<int>(values_db.cols());
  ds.sample_rate = sample_rate;
  ds.samples.reserve(static_cast<std::size_t>(values_db.size()));
  for (int d = 0; d < ds.num_directions; ++d) {
    const Direction4D check(dirs[static_cast<std::size_t>(d)].phi,
                            dirs[static_cast<std::size_t>(d)].theta, 0.0);
    for (int b = 0; b < ds.num_bins; ++b) {
      const double h = values_db(d, b);
      if (!std::isfinite(h)) {
        throw InvalidArgument("dataset_from_grid: non-finite magnitude");
      }
      ds.samples.push_back({check.phi(), check.theta(),
                            freq_to_psi(ds.bin_frequency(b), mapping), h, b,
                            d});
    }
  }
  return ds;
}

/// (phi, theta) for each measured direction, in input order.
inline std::vector<SphericalAngles> direction_grid(const HrirSet& set) {
  std::vector<SphericalAngles> out;
  out.reserve(set.directions.size());
  for (const AzEl& d : set.directions) {
    out.push_back(angles_from_az_el(d.azimuth_deg, d.elevation_deg));
  }
  return out;
}

/// One-sided DFT magnitude in dB (reference 1, unnormalized forward
/// transform) for bins 0 .. ir_length / 2 of every direction. Magnitudes
/// below db_floor are raised to db_floor first.
inline MagnitudeDataset magnitude_spectra(const HrirSet& set,
                                          double db_floor = kDefaultDbFloor) {
  validate(set);
  if (!(db_floor > 0.0) || !std::isfinite(db_floor)) {
    throw InvalidArgument("db_floor must be positive and finite");
  }
  const int n = set.ir_length;
  const int bins = n / 2 + 1;
  const auto grid = direction_grid(set);

  // Twiddles indexed by (k * t) mod n keep every bin on exact table values.
  std::vector<double> cos_table(static_cast<std::size_t>(n));
  std::vector<double> sin_table(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double a = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    cos_table[static_cast<std::size_t>(j)] = std::cos(a);
    sin_table[static_cast<std::size_t>(j)] = std::sin(a);
  }

  Eigen::MatrixXd db(static_cast<Eigen::Index>(grid.size()), bins);
  for (Eigen::Index d = 0; d < db.rows(); ++d) {
    for (int k = 0; k < bins; ++k) {
      double re = 0.0;
      double im = 0.0;
      for (int t = 0; t < n; ++t) {
        const auto j = static_cast<std::size_t>(
            (static_cast<long long>(k) * t) % n);
        const double x = set.impulses(d, t);
        re += x * cos_table[j];
        im -= x * sin_table[j];
      }
      const double mag = std::max(std::hypot(re, im), db_floor);
      db(d, k) = 20.0 * std::log10(mag / 1.0);
    }
  }
  return dataset_from_grid(set.sample_rate, grid, db);
}

}  // namespace hshrtf

#endif  // HSHRTF_INGEST_HPP_
