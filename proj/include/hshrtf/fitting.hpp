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

// Weighted least-squares fitting of HSH coefficients, plus the per-bin SH
// baseline.
//
// The HSH fit minimises sum_k w_k (H^(Omega_k) - H_k)^2 through the normal
// equations (Z^T W Z) alpha = Z^T W H, factored with Cholesky. Each sample
// row and target is scaled by sqrt(w_k) while accumulating; samples with
// w_k = 0 are never touched.
//
// Two accumulation routes produce the same system:
//   * blockwise: basis rows are evaluated for every sample and folded into
//     the normal matrix in fixed-size blocks (works for any sample layout);
//   * factored: on a direction x bin product grid whose weights depend on the
//     bin only, Z_i(d, b) = R_i(b) Y_i(d), so
//       (Z^T W Z)_ij = [sum_d Y_i Y_j] [sum_b w_b R_i R_j]
//     and no design-matrix row is ever materialised.

#ifndef HSHRTF_FITTING_HPP_
#define HSHRTF_FITTING_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hshrtf/basis.hpp"
#include "hshrtf/coords.hpp"
#include "hshrtf/error.hpp"
#include "hshrtf/ingest.hpp"
#include "hshrtf/model.hpp"

namespace hshrtf {

// Condition estimates above this are reported as ill-conditioned.
inline constexpr double kConditionWarning = 1e10;

// Per-bin weights: bins below dropped_low_bins get 0, bins above taper_start
// roll off to 0 at taper_end along a raised-cosine (half Hann) curve
//   w(f) = 0.5 (1 + cos(pi (f - taper_start) / (taper_end - taper_start))).
struct WeightingSpec {
  int dropped_low_bins = 2;
  double taper_start = 20000.0;
  std::optional<double> taper_end;  // Nyquist when unset
  bool enabled = true;

  static WeightingSpec uniform() {
    WeightingSpec s;
    s.enabled = false;
    s.dropped_low_bins = 0;
    return s;
  }

  double resolved_taper_end(double nyquist) const {
    return taper_end.value_or(nyquist);
  }

  std::string describe(double nyquist) const {
    if (!enabled) return "uniform";
    std::ostringstream os;
    os.precision(17);
    os << "drop bins<" << dropped_low_bins
       << "; raised-cosine 0.5*(1+cos(pi*(f-" << taper_start << ")/("
       << resolved_taper_end(nyquist) << "-" << taper_start << ")))";
    return os.str();
  }
};

inline void validate(const WeightingSpec& spec, double nyquist) {
  if (!spec.enabled) return;
  const double end = spec.resolved_taper_end(nyquist);
  if (spec.dropped_low_bins < 0) {
    throw InvalidArgument("weighting: dropped_low_bins must be >= 0");
  }
  if (!(spec.taper_start >= 0.0) || !(spec.taper_start < end) ||
      !std::isfinite(end)) {
    throw InvalidArgument("weighting: require 0 <= taper_start < taper_end, got " +
                          std::to_string(spec.taper_start) + " and " +
                          std::to_string(end));
  }
}

/// Taper weight at frequency f (ignores the dropped low bins).
inline double frequency_weight(const WeightingSpec& spec, double f,
                               double nyquist) {
  if (!spec.enabled) return 1.0;
  const double end = spec.resolved_taper_end(nyquist);
  if (f <= spec.taper_start) return 1.0;
  if (f >= end) return 0.0;
  return 0.5 * (1.0 + std::cos(kPi * (f - spec.taper_start) /
                               (end - spec.taper_start)));
}

/// Per-bin weights for a num_bins spectrum at the given sample rate.
inline std::vector<double> bin_weights(int num_bins, double sample_rate,
                                       const WeightingSpec& spec) {
  if (num_bins < 2) throw InvalidArgument("bin_weights: need >= 2 bins");
  std::vector<double> w(static_cast<std::size_t>(num_bins), 1.0);
  if (!spec.enabled) return w;
  const double nyquist = 0.5 * sample_rate;
  validate(spec, nyquist);
  if (spec.dropped_low_bins >= num_bins) {
    throw InvalidArgument("weighting: dropping " +
                          std::to_string(spec.dropped_low_bins) +
                          " bins leaves nothing of " +
                          std::to_string(num_bins));
  }
  const double ir_length = 2.0 * (num_bins - 1);
  for (int k = 0; k < num_bins; ++k) {
    const double f = k * sample_rate / ir_length;
    w[static_cast<std::size_t>(k)] =
        k < spec.dropped_low_bins ? 0.0 : frequency_weight(spec, f, nyquist);
  }
  return w;
}

/// One weight per dataset sample, in sample order.
inline std::vector<double> build_weights(const MagnitudeDataset& dataset,
                                         const WeightingSpec& spec) {
  const auto per_bin =
      bin_weights(dataset.num_bins, dataset.sample_rate, spec);
  std::vector<double> w;
  w.reserve(dataset.size());
  for (const MagnitudeSample& s : dataset.samples) {
    if (s.bin_index < 0 || s.bin_index >= dataset.num_bins) {
      throw InvalidArgument("build_weights: sample bin index out of range");
    }
    w.push_back(per_bin[static_cast<std::size_t>(s.bin_index)]);
  }
  return w;
}

struct FitReport {
  double weighted_rss = 0.0;  // dB^2
  double condition_estimate = 0.0;
  std::size_t num_samples_used = 0;
  std::size_t num_coefficients = 0;
  std::string solver;  // "factored" or "blockwise"

  bool ill_conditioned() const { return condition_estimate > kConditionWarning; }
};

struct FitOptions {
  enum class Route { kAuto, kBlockwise };
  Route route = Route::kAuto;
  std::size_t block_size = 1024;
};

struct HshFit {
  CoefficientSet model;
  FitReport report;
};

namespace detail {

struct NormalSolution {
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt;
  Eigen::VectorXd x;
  double condition = 0.0;
};

// Solves A x = b for symmetric positive-definite A (lower triangle used).
inline NormalSolution solve_normal_equations(const Eigen::MatrixXd& a,
                                             const Eigen::VectorXd& b) {
  if (!a.allFinite() || !b.allFinite()) {
    throw NumericalError("normal equations contain non-finite values",
                         std::numeric_limits<double>::infinity());
  }
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(
        "normal matrix is singular or not positive definite",
        std::numeric_limits<double>::infinity());
  }
  const double rcond = llt.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond
                                  : std::numeric_limits<double>::infinity();
  if (!(rcond > std::numeric_limits<double>::epsilon())) {
    std::ostringstream os;
    os << "normal matrix is numerically singular (condition estimate " << cond
       << ")";
    throw NumericalError(os.str(), cond);
  }
  NormalSolution s;
  s.x = llt.solve(b);
  s.llt = std::move(llt);
  s.condition = cond;
  if (!s.x.allFinite()) {
    throw NumericalError("least-squares solution is not finite", cond);
  }
  return s;
}

// Per-bin weights when weights[d * B + b] depends on b only.
inline std::optional<std::vector<double>> bin_only_weights(
    const MagnitudeDataset& ds, std::span<const double> weights) {
  const auto bins = static_cast<std::size_t>(ds.num_bins);
  std::vector<double> w(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(bins));
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] != w[k % bins]) return std::nullopt;
  }
  return w;
}

inline HshFit fit_blockwise(const MagnitudeDataset& ds, const IndexSet& set,
                            std::span<const double> weights,
                            std::size_t block_size) {
  const auto p = static_cast<Eigen::Index>(set.size());
  const auto block = static_cast<Eigen::Index>(std::max<std::size_t>(block_size, 1));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> zb(block, p);
  Eigen::VectorXd hb(block);
  std::vector<double> row(set.size());
  Eigen::Index fill = 0;
  std::size_t used = 0;

  auto flush = [&] {
    if (fill == 0) return;
    const auto z = zb.topRows(fill);
    a.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
    b.noalias() += z.transpose() * hb.head(fill);
    fill = 0;
  };

  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    const MagnitudeSample& s = ds.samples[k];
    eval_basis_row(set, s.phi, s.theta, s.psi, row);
    const double sw = std::sqrt(w);
    for (Eigen::Index j = 0; j < p; ++j) {
      zb(fill, j) = sw * row[static_cast<std::size_t>(j)];
    }
    hb(fill) = sw * s.h_db;
    ++fill;
    ++used;
    if (fill == block) flush();
  }
  flush();

  auto sol = solve_normal_equations(a, b);

  // One refinement step: residuals come from the data, not from A, which
  // recovers most of the accuracy lost by squaring the condition number.
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
  double rss = 0.0;
  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    const MagnitudeSample& s = ds.samples[k];
    eval_basis_row(set, s.phi, s.theta, s.psi, row);
    const Eigen::Map<const Eigen::VectorXd> z(row.data(), p);
    const double e = s.h_db - z.dot(sol.x);
    g.noalias() += (w * e) * z;
    rss += w * e * e;
  }
  const Eigen::VectorXd dx = sol.llt.solve(g);
  sol.x += dx;
  rss = std::max(0.0, rss - 2.0 * dx.dot(g) +
                          dx.dot(a.selfadjointView<Eigen::Lower>() * dx));
  if (!sol.x.allFinite()) {
    throw NumericalError("least-squares solution is not finite", sol.condition);
  }
  std::vector<double> coeffs(sol.x.data(), sol.x.data() + sol.x.size());

  FitReport report{rss, sol.condition, used, set.size(), "blockwise"};
  return {CoefficientSet(set, std::move(coeffs), ds.sample_rate), report};
}

inline HshFit fit_factored(const MagnitudeDataset& ds, const IndexSet& set,
                           std::span<const double> bin_w) {
  const FactoredLayout layout(set);
  const auto dirs = ds.directions();
  std::vector<double> psis(static_cast<std::size_t>(ds.num_bins));
  for (int b = 0; b < ds.num_bins; ++b) {
    psis[static_cast<std::size_t>(b)] = ds.at(0, b).psi;
  }
  const Eigen::MatrixXd y = sh_matrix(set.l_max(), dirs);   // D x S
  const Eigen::MatrixXd r = radial_matrix(set, layout, psis);  // B x P
  const Eigen::MatrixXd h = ds.magnitudes();                // D x B
  const Eigen::Map<const Eigen::VectorXd> w(bin_w.data(),
                                            static_cast<Eigen::Index>(bin_w.size()));

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(y.cols(), y.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(y.transpose());
  g = g.selfadjointView<Eigen::Lower>();
  const Eigen::MatrixXd rw = w.asDiagonal() * r;
  const Eigen::MatrixXd rg = r.transpose() * rw;          // P x P
  const Eigen::MatrixXd u = (y.transpose() * h) * rw;     // S x P

  const auto n = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto si = static_cast<Eigen::Index>(layout.slot_of[static_cast<std::size_t>(i)]);
    const auto pi = static_cast<Eigen::Index>(layout.pair_of[static_cast<std::size_t>(i)]);
    b(i) = u(si, pi);
    for (Eigen::Index j = 0; j <= i; ++j) {
      const auto sj = static_cast<Eigen::Index>(layout.slot_of[static_cast<std::size_t>(j)]);
      const auto pj = static_cast<Eigen::Index>(layout.pair_of[static_cast<std::size_t>(j)]);
      a(i, j) = g(si, sj) * rg(pi, pj);
    }
  }

  auto sol = solve_normal_equations(a, b);

  // q(slot, bin) = sum of x_i R_i(bin) over indices sharing the slot.
  auto reconstruct = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(y.cols(), r.rows());  // S x B
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      q.row(static_cast<Eigen::Index>(layout.slot_of[i])) +=
          x(ii) * r.col(static_cast<Eigen::Index>(layout.pair_of[i])).transpose();
    }
    return Eigen::MatrixXd(h - y * q);
  };

  // One refinement step from the data residual, as in fit_blockwise.
  const Eigen::MatrixXd resid0 = reconstruct(sol.x);
  const Eigen::MatrixXd ug = (y.transpose() * resid0) * rw;  // S x P
  Eigen::VectorXd grad(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    grad(i) = ug(static_cast<Eigen::Index>(layout.slot_of[static_cast<std::size_t>(i)]),
              static_cast<Eigen::Index>(layout.pair_of[static_cast<std::size_t>(i)]));
  }
  sol.x += sol.llt.solve(grad);
  if (!sol.x.allFinite()) {
    throw NumericalError("least-squares solution is not finite", sol.condition);
  }
  std::vector<double> coeffs(sol.x.data(), sol.x.data() + sol.x.size());

  const Eigen::MatrixXd resid = reconstruct(sol.x);
  const double rss = (resid.array().square().colwise().sum().transpose() * w.array()).sum();

  std::size_t used = 0;
  for (double wb : bin_w) used += wb != 0.0 ? static_cast<std::size_t>(ds.num_directions) : 0;

  FitReport report{rss, sol.condition, used, set.size(), "factored"};
  return {CoefficientSet(set, std::move(coeffs), ds.sample_rate), report};
}

}  // namespace detail

/// Weighted least-squares HSH fit. Coefficients follow set's canonical order.
inline HshFit fit_hsh(const MagnitudeDataset& dataset, const IndexSet& set,
                      std::span<const double> weights,
                      const FitOptions& options = {}) {
  if (set.size() == 0) throw InvalidArgument("fit_hsh: empty index set");
  if (weights.size() != dataset.samples.size()) {
    throw InvalidArgument("fit_hsh: " + std::to_string(weights.size()) +
                          " weights for " +
                          std::to_string(dataset.samples.size()) + " samples");
  }
  std::size_t effective = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double w = weights[k];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("fit_hsh: weights must be finite and >= 0");
    }
    if (w > 0.0) {
      ++effective;
      const MagnitudeSample& s = dataset.samples[k];
      if (!std::isfinite(s.phi) || !std::isfinite(s.theta) ||
          !std::isfinite(s.psi) || !std::isfinite(s.h_db)) {
        throw InvalidArgument("fit_hsh: non-finite sample " + std::to_string(k));
      }
    }
  }
  if (effective < set.size()) {
    throw NumericalError("fit_hsh: " + std::to_string(effective) +
                             " weighted samples cannot determine " +
                             std::to_string(set.size()) + " coefficients",
                         std::numeric_limits<double>::infinity());
  }
  if (options.route == FitOptions::Route::kAuto && dataset.is_product_grid()) {
    if (auto bin_w = detail::bin_only_weights(dataset, weights)) {
      return detail::fit_factored(dataset, set, *bin_w);
    }
  }
  return detail::fit_blockwise(dataset, set, weights, options.block_size);
}

/// Independent real-SH least-squares fit (all l <= sh_order) for every bin
/// of a product-grid dataset. Unweighted; all bins are fitted.
inline ShModel fit_sh_per_bin(const MagnitudeDataset& dataset, int sh_order,
                              double* condition_estimate = nullptr) {
  if (sh_order < 0 || sh_order > kMaxOrder) {
    throw InvalidArgument("fit_sh_per_bin: sh_order out of range");
  }
  if (!dataset.is_product_grid()) {
    throw InvalidArgument("fit_sh_per_bin: dataset is not a direction x bin grid");
  }
  const std::size_t s = sh_count(sh_order);
  if (static_cast<std::size_t>(dataset.num_directions) < s) {
    throw NumericalError("fit_sh_per_bin: " +
                             std::to_string(dataset.num_directions) +
                             " directions cannot determine " +
                             std::to_string(s) + " coefficients per bin",
                         std::numeric_limits<double>::infinity());
  }
  const auto dirs = dataset.directions();
  const Eigen::MatrixXd y = detail::sh_matrix(sh_order, dirs);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(y.cols(), y.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(y.transpose());
  const Eigen::MatrixXd rhs = y.transpose() * dataset.magnitudes();  // S x B

  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(g);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("SH normal matrix is singular",
                         std::numeric_limits<double>::infinity());
  }
  const double rcond = llt.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond
                                  : std::numeric_limits<double>::infinity();
  if (!(rcond > std::numeric_limits<double>::epsilon())) {
    throw NumericalError("SH normal matrix is numerically singular", cond);
  }
  if (condition_estimate) *condition_estimate = cond;
  Eigen::MatrixXd coeffs = llt.solve(rhs).transpose();  // B x S
  return ShModel(sh_order, dataset.sample_rate, std::move(coeffs));
}

}  // namespace hshrtf

#endif  // HSHRTF_FITTING_HPP_
