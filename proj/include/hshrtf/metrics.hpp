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

// Error statistics between approximated and measured dB magnitudes on the
// measured direction x bin grid. Matrices are num_directions x num_bins.
//
// Percentiles use linear interpolation between order statistics: for sorted
// x[0..n-1] and p in (0, 100), h = (n - 1) p / 100 and
//   P = x[floor(h)] + (h - floor(h)) (x[floor(h) + 1] - x[floor(h)]).

#ifndef HSHRTF_METRICS_HPP_
#define HSHRTF_METRICS_HPP_

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hshrtf/error.hpp"
#include "hshrtf/ingest.hpp"
#include "hshrtf/model.hpp"

namespace hshrtf {

struct ErrorCurve {
  std::vector<double> freqs;   // Hz, strictly increasing
  std::vector<double> values;  // dB
};

struct SizeAccounting {
  std::size_t hsh_coeffs = 0;
  std::size_t sh_coeffs = 0;
  std::size_t raw_samples = 0;
  double compression_ratio = 0.0;  // raw_samples / hsh_coeffs
  double sh_to_hsh_ratio = 0.0;    // sh_coeffs / hsh_coeffs
};

struct ComparisonReport {
  ErrorCurve rms_hsh;
  ErrorCurve rms_sh;
  ErrorCurve p95_hsh;
  ErrorCurve p95_sh;
  ErrorCurve rms_diff;
  ErrorCurve p5_diff;
  ErrorCurve p95_diff;
  double sd_hsh = 0.0;
  double sd_sh = 0.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
  std::size_t sd_bins = 0;
  SizeAccounting size;
  std::size_t sh_coeffs_excluding_dropped = 0;
  int dropped_low_bins = 0;
};

namespace detail {

inline void check_shapes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         std::span<const double> freqs) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("matrix shapes differ: " + std::to_string(a.rows()) +
                          "x" + std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  }
  if (static_cast<std::size_t>(a.cols()) != freqs.size()) {
    throw InvalidArgument("frequency count does not match matrix columns");
  }
  for (std::size_t j = 1; j < freqs.size(); ++j) {
    if (!(freqs[j] > freqs[j - 1])) {
      throw InvalidArgument("frequencies must be strictly increasing");
    }
  }
}

inline void check_percent(double p) {
  if (!(p > 0.0 && p < 100.0)) {
    throw InvalidArgument("percentile must lie in (0, 100)");
  }
}

}  // namespace detail

/// Linear-interpolation percentile of values (reordered in place).
inline double percentile(std::span<double> values, double p) {
  detail::check_percent(p);
  if (values.empty()) throw InvalidArgument("percentile of empty set");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

/// RMS over directions of (approx - raw), per bin.
inline ErrorCurve rms_per_frequency(const Eigen::MatrixXd& approx,
                                    const Eigen::MatrixXd& raw,
                                    std::span<const double> freqs) {
  detail::check_shapes(approx, raw, freqs);
  ErrorCurve c{{freqs.begin(), freqs.end()}, {}};
  const Eigen::MatrixXd e = approx - raw;
  for (Eigen::Index b = 0; b < e.cols(); ++b) {
    c.values.push_back(std::sqrt(e.col(b).squaredNorm() /
                                 static_cast<double>(e.rows())));
  }
  return c;
}

/// p-th percentile of |approx - raw| over directions, per bin.
inline ErrorCurve percentile_abs_error(const Eigen::MatrixXd& approx,
                                       const Eigen::MatrixXd& raw,
                                       std::span<const double> freqs,
                                       double p) {
  detail::check_shapes(approx, raw, freqs);
  detail::check_percent(p);
  ErrorCurve c{{freqs.begin(), freqs.end()}, {}};
  std::vector<double> col(static_cast<std::size_t>(approx.rows()));
  for (Eigen::Index b = 0; b < approx.cols(); ++b) {
    for (Eigen::Index d = 0; d < approx.rows(); ++d) {
      col[static_cast<std::size_t>(d)] = std::abs(approx(d, b) - raw(d, b));
    }
    c.values.push_back(percentile(col, p));
  }
  return c;
}

/// p-th percentile of |hsh - raw| - |sh - raw| over directions, per bin.
inline ErrorCurve error_diff_percentiles(const Eigen::MatrixXd& hsh,
                                         const Eigen::MatrixXd& sh,
                                         const Eigen::MatrixXd& raw,
                                         std::span<const double> freqs,
                                         double p) {
  detail::check_shapes(hsh, raw, freqs);
  detail::check_shapes(sh, raw, freqs);
  detail::check_percent(p);
  ErrorCurve c{{freqs.begin(), freqs.end()}, {}};
  std::vector<double> col(static_cast<std::size_t>(raw.rows()));
  for (Eigen::Index b = 0; b < raw.cols(); ++b) {
    for (Eigen::Index d = 0; d < raw.rows(); ++d) {
      col[static_cast<std::size_t>(d)] =
          std::abs(hsh(d, b) - raw(d, b)) - std::abs(sh(d, b) - raw(d, b));
    }
    c.values.push_back(percentile(col, p));
  }
  return c;
}

/// RMS of (approx - raw) pooled over all directions and the bins with
/// f_lo <= f <= f_hi.
inline double spectral_distortion(const Eigen::MatrixXd& approx,
                                  const Eigen::MatrixXd& raw,
                                  std::span<const double> freqs, double f_lo,
                                  double f_hi,
                                  std::size_t* bins_used = nullptr) {
  detail::check_shapes(approx, raw, freqs);
  if (!(f_lo < f_hi)) throw InvalidArgument("spectral_distortion: f_lo >= f_hi");
  double sum = 0.0;
  std::size_t bins = 0;
  for (std::size_t b = 0; b < freqs.size(); ++b) {
    if (freqs[b] < f_lo || freqs[b] > f_hi) continue;
    const auto col = static_cast<Eigen::Index>(b);
    sum += (approx.col(col) - raw.col(col)).squaredNorm();
    ++bins;
  }
  if (bins == 0 || raw.rows() == 0) {
    throw InvalidArgument("spectral_distortion: no bins in [" +
                          std::to_string(f_lo) + ", " + std::to_string(f_hi) +
                          "] Hz");
  }
  if (bins_used) *bins_used = bins;
  return std::sqrt(sum / static_cast<double>(bins * static_cast<std::size_t>(raw.rows())));
}

/// Coefficients needed by an order-`order` SH model over `bins` bins.
inline std::size_t sh_coefficient_count(int order, std::size_t bins) {
  return sh_count(order) * bins;
}

inline SizeAccounting size_accounting(std::size_t hsh_coeffs,
                                      std::size_t sh_coeffs,
                                      std::size_t raw_samples) {
  if (hsh_coeffs == 0) throw InvalidArgument("size_accounting: empty HSH model");
  SizeAccounting s;
  s.hsh_coeffs = hsh_coeffs;
  s.sh_coeffs = sh_coeffs;
  s.raw_samples = raw_samples;
  s.compression_ratio =
      static_cast<double>(raw_samples) / static_cast<double>(hsh_coeffs);
  s.sh_to_hsh_ratio =
      static_cast<double>(sh_coeffs) / static_cast<double>(hsh_coeffs);
  return s;
}

inline SizeAccounting size_accounting(const CoefficientSet& hsh_model,
                                      const ShModel& sh_model,
                                      const MagnitudeDataset& dataset) {
  return size_accounting(hsh_model.coefficients().size(),
                         sh_model.coefficient_count(), dataset.size());
}

/// Full HSH-vs-SH comparison against the measured magnitudes.
inline ComparisonReport compare_models(const MagnitudeDataset& raw,
                                       const CoefficientSet& hsh_model,
                                       const ShModel& sh_model, double f_lo,
                                       double f_hi,
                                       int dropped_low_bins = 2) {
  if (hsh_model.sample_rate() != raw.sample_rate ||
      sh_model.sample_rate() != raw.sample_rate) {
    throw InvalidArgument("compare: sample rates differ (raw " +
                          std::to_string(raw.sample_rate) + ", HSH " +
                          std::to_string(hsh_model.sample_rate()) + ", SH " +
                          std::to_string(sh_model.sample_rate()) + ")");
  }
  if (sh_model.num_bins() != raw.num_bins) {
    throw InvalidArgument("compare: SH model has " +
                          std::to_string(sh_model.num_bins()) +
                          " bins, data has " + std::to_string(raw.num_bins));
  }
  if (!raw.is_product_grid()) {
    throw InvalidArgument("compare: data is not a direction x bin grid");
  }
  const auto freqs = raw.bin_frequencies();
  const auto dirs = raw.directions();
  const Eigen::MatrixXd h = raw.magnitudes();
  const Eigen::MatrixXd hsh = decode_grid(hsh_model, dirs, freqs);
  const Eigen::MatrixXd sh = decode_sh_grid(sh_model, dirs);

  ComparisonReport r;
  r.rms_hsh = rms_per_frequency(hsh, h, freqs);
  r.rms_sh = rms_per_frequency(sh, h, freqs);
  r.p95_hsh = percentile_abs_error(hsh, h, freqs, 95.0);
  r.p95_sh = percentile_abs_error(sh, h, freqs, 95.0);
  r.rms_diff.freqs = freqs;
  for (std::size_t b = 0; b < freqs.size(); ++b) {
    r.rms_diff.values.push_back(r.rms_hsh.values[b] - r.rms_sh.values[b]);
  }
  r.p5_diff = error_diff_percentiles(hsh, sh, h, freqs, 5.0);
  r.p95_diff = error_diff_percentiles(hsh, sh, h, freqs, 95.0);
  r.sd_hsh = spectral_distortion(hsh, h, freqs, f_lo, f_hi, &r.sd_bins);
  r.sd_sh = spectral_distortion(sh, h, freqs, f_lo, f_hi);
  r.f_lo = f_lo;
  r.f_hi = f_hi;
  r.size = size_accounting(hsh_model, sh_model, raw);
  r.dropped_low_bins = std::clamp(dropped_low_bins, 0, raw.num_bins);
  r.sh_coeffs_excluding_dropped = sh_coefficient_count(
      sh_model.sh_order(),
      static_cast<std::size_t>(raw.num_bins - r.dropped_low_bins));
  return r;
}

namespace detail {

inline std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace detail

inline void write_curve_csv(const ErrorCurve& curve,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  out << "freq_hz,value_db\n";
  for (std::size_t i = 0; i < curve.freqs.size(); ++i) {
    out << detail::format_g9(curve.freqs[i]) << ','
        << detail::format_g9(curve.values[i]) << '\n';
  }
  if (!out) throw FormatError(path.string() + ": write failed");
}

/// Summary rows as (key, formatted value).
inline std::vector<std::pair<std::string, std::string>> summary_rows(
    const ComparisonReport& r) {
  using detail::format_g9;
  return {
      {"sd_hsh_db", format_g9(r.sd_hsh)},
      {"sd_sh_db", format_g9(r.sd_sh)},
      {"sd_f_lo_hz", format_g9(r.f_lo)},
      {"sd_f_hi_hz", format_g9(r.f_hi)},
      {"sd_bins", std::to_string(r.sd_bins)},
      {"hsh_coeffs", std::to_string(r.size.hsh_coeffs)},
      {"sh_coeffs", std::to_string(r.size.sh_coeffs)},
      {"sh_coeffs_excluding_dropped_bins",
       std::to_string(r.sh_coeffs_excluding_dropped)},
      {"dropped_low_bins", std::to_string(r.dropped_low_bins)},
      {"raw_samples", std::to_string(r.size.raw_samples)},
      {"compression_ratio", format_g9(r.size.compression_ratio)},
      {"sh_to_hsh_ratio", format_g9(r.size.sh_to_hsh_ratio)},
  };
}

/// Writes one CSV per curve plus summary.csv into dir.
inline std::vector<std::filesystem::path> write_report(
    const ComparisonReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, const ErrorCurve*> curves[] = {
      {"rms_hsh.csv", &r.rms_hsh},   {"rms_sh.csv", &r.rms_sh},
      {"p95_hsh.csv", &r.p95_hsh},   {"p95_sh.csv", &r.p95_sh},
      {"rms_diff.csv", &r.rms_diff}, {"p5_diff.csv", &r.p5_diff},
      {"p95_diff.csv", &r.p95_diff},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, curve] : curves) {
    write_curve_csv(*curve, dir / name);
    written.push_back(dir / name);
  }
  const auto summary = dir / "summary.csv";
  std::ofstream out(summary, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(summary.string() + ": cannot open for writing");
  out << "key,value\n";
  for (const auto& [k, v] : summary_rows(r)) out << k << ',' << v << '\n';
  if (!out) throw FormatError(summary.string() + ": write failed");
  written.push_back(summary);
  return written;
}

}  // namespace hshrtf

#endif  // HSHRTF_METRICS_HPP_
