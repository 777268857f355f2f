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

// Real hyperspherical harmonics on the unit 3-sphere and the special
// functions they are built from.
//
//   Z_nl^m(phi, theta, psi) = N(n, l) sin^l(psi) C_{n-l}^{l+1}(cos psi)
//                             Y_l^m(phi, theta)
//
// with 0 <= l <= n and -l <= m <= l. Y_l^m is the real spherical harmonic
// (cos(m phi) for m >= 0, sin(|m| phi) for m < 0) built from associated
// Legendre functions WITHOUT the Condon-Shortley phase. Flipping that phase
// only flips the sign of the affected coefficients.
//
// Basis functions are orthonormal under the measure
//   sin^2(psi) dpsi sin(theta) dtheta dphi.

#ifndef HSHRTF_BASIS_HPP_
#define HSHRTF_BASIS_HPP_

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hshrtf/error.hpp"

namespace hshrtf {

// Largest n accepted anywhere in the library.
inline constexpr int kMaxOrder = 200;

// (n, l, m) triple. The defaulted comparison is the canonical ordering:
// lexicographic in n, then l, then m ascending from -l.
struct HshIndex {
  int n = 0;
  int l = 0;
  int m = 0;

  friend auto operator<=>(const HshIndex&, const HshIndex&) = default;
};

inline bool is_valid(const HshIndex& idx) {
  return idx.n >= 0 && idx.l >= 0 && idx.l <= idx.n && idx.m >= -idx.l &&
         idx.m <= idx.l;
}

inline std::string to_string(const HshIndex& idx) {
  return "(" + std::to_string(idx.n) + "," + std::to_string(idx.l) + "," +
         std::to_string(idx.m) + ")";
}

// Slot of (l, m) in the real-SH ordering l^2 + l + m, i.e. lexicographic in
// (l, m) with m ascending from -l.
inline constexpr std::size_t sh_slot(int l, int m) {
  return static_cast<std::size_t>(l * l + l + m);
}

inline constexpr std::size_t sh_count(int order) {
  return static_cast<std::size_t>((order + 1) * (order + 1));
}

class IndexSet;
IndexSet build_index_set(int n_max, int l_max, int m_max, bool psi_symmetric);

// Truncated, optionally psi-symmetric basis enumeration in canonical order.
// Only build_index_set() creates non-empty sets.
class IndexSet {
 public:
  IndexSet() = default;

  int n_max() const noexcept { return n_max_; }
  int l_max() const noexcept { return l_max_; }
  int m_max() const noexcept { return m_max_; }
  bool psi_symmetric() const noexcept { return psi_symmetric_; }

  std::span<const HshIndex> indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  const HshIndex& operator[](std::size_t j) const { return indices_[j]; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  // Position of idx within the set, if present.
  std::optional<std::size_t> find(const HshIndex& idx) const {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), idx);
    if (it == indices_.end() || *it != idx) return std::nullopt;
    return static_cast<std::size_t>(it - indices_.begin());
  }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  friend IndexSet build_index_set(int, int, int, bool);

  int n_max_ = 0;
  int l_max_ = 0;
  int m_max_ = 0;
  bool psi_symmetric_ = false;
  std::vector<HshIndex> indices_;
};

namespace detail {

inline void check_order(int n) {
  if (n > kMaxOrder) {
    throw RangeError("order n = " + std::to_string(n) +
                     " exceeds supported maximum " +
                     std::to_string(kMaxOrder));
  }
}

// base^e by repeated multiplication. Shared by the scalar and row evaluators
// so both produce identical bits.
inline double int_pow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Fills out[k] = C_k^alpha(x) for k = 0 .. out.size() - 1.
inline void gegenbauer_sequence(double alpha, double x, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = 2.0 * alpha * x;
  for (std::size_t k = 2; k < out.size(); ++k) {
    const double kd = static_cast<double>(k);
    out[k] = (2.0 * x * (kd + alpha - 1.0) * out[k - 1] -
              (kd + 2.0 * alpha - 2.0) * out[k - 2]) /
             kd;
  }
}

// Fills out[j] = P_{m+j}^m(x) for j = 0 .. out.size() - 1, where
// s = sqrt(1 - x^2) is supplied by the caller (sin(theta) when x = cos(theta)).
// No Condon-Shortley phase.
inline void legendre_column(int m, double x, double s, std::span<double> out) {
  if (out.empty()) return;
  double pmm = 1.0;
  for (int i = 1; i <= m; ++i) pmm *= static_cast<double>(2 * i - 1) * s;
  out[0] = pmm;
  if (out.size() == 1) return;
  out[1] = x * static_cast<double>(2 * m + 1) * pmm;
  for (std::size_t j = 2; j < out.size(); ++j) {
    const int l = m + static_cast<int>(j);
    out[j] = (static_cast<double>(2 * l - 1) * x * out[j - 1] -
              static_cast<double>(l + m - 1) * out[j - 2]) /
             static_cast<double>(l - m);
  }
}

inline double radial_value(double norm, double sin_pow, double gegen) {
  return norm * sin_pow * gegen;
}

inline double sh_value(double norm, double legendre, double trig) {
  return norm * legendre * trig;
}

inline double sh_trig(int m, double phi) {
  return m >= 0 ? std::cos(static_cast<double>(m) * phi)
                : std::sin(static_cast<double>(-m) * phi);
}

}  // namespace detail

/// Gegenbauer (ultraspherical) polynomial C_nu^alpha(x) by the standard
/// three-term recurrence.
inline double gegenbauer(int nu, double alpha, double x) {
  if (nu < 0) {
    throw InvalidArgument("gegenbauer: negative degree " + std::to_string(nu));
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("gegenbauer: alpha must be positive and finite");
  }
  if (!std::isfinite(x)) {
    throw InvalidArgument("gegenbauer: non-finite abscissa");
  }
  std::vector<double> seq(static_cast<std::size_t>(nu) + 1);
  detail::gegenbauer_sequence(alpha, x, seq);
  return seq.back();
}

/// Associated Legendre function P_l^m(x), 0 <= m <= l, without the
/// (-1)^m Condon-Shortley factor. Stable upward recurrence in l from P_m^m.
inline double assoc_legendre(int l, int m, double x) {
  if (m < 0 || m > l) {
    throw InvalidArgument("assoc_legendre: require 0 <= m <= l, got l=" +
                          std::to_string(l) + " m=" + std::to_string(m));
  }
  if (!std::isfinite(x) || std::abs(x) > 1.0) {
    throw InvalidArgument("assoc_legendre: x must lie in [-1, 1]");
  }
  std::vector<double> col(static_cast<std::size_t>(l - m) + 1);
  detail::legendre_column(m, x, std::sqrt((1.0 - x) * (1.0 + x)), col);
  return col.back();
}

/// Real-SH normalization sqrt((2 - delta_m0) (2l+1)/(4 pi) (l-|m|)!/(l+|m|)!).
inline double sh_normalization(int l, int m) {
  const int am = std::abs(m);
  if (l < 0 || am > l) {
    throw InvalidArgument("sh_normalization: require |m| <= l");
  }
  const double log_ratio =
      std::lgamma(l - am + 1.0) - std::lgamma(l + am + 1.0);
  const double two_minus_delta = (m == 0) ? 1.0 : 2.0;
  return std::sqrt(two_minus_delta * (2.0 * l + 1.0) /
                   (4.0 * std::numbers::pi) * std::exp(log_ratio));
}

/// Real spherical harmonic Y_l^m(phi, theta); phi is the azimuth, theta the
/// inclination from the +z axis.
inline double real_sh(int l, int m, double phi, double theta) {
  const double norm = sh_normalization(l, m);
  const int am = std::abs(m);
  std::vector<double> col(static_cast<std::size_t>(l - am) + 1);
  detail::legendre_column(am, std::cos(theta), std::sin(theta), col);
  return detail::sh_value(norm, col.back(), detail::sh_trig(m, phi));
}

/// Orthonormalizing factor of the (n, l) radial part,
///   N(n, l) = 2^(l + 1/2) l! sqrt((n + 1) (n - l)! / (pi (n + l + 1)!)),
/// evaluated in the log domain. Throws RangeError for n > kMaxOrder.
inline double hsh_normalization(int n, int l) {
  if (l < 0 || l > n) {
    throw InvalidArgument("hsh_normalization: require 0 <= l <= n");
  }
  detail::check_order(n);
  const double log_norm =
      (l + 0.5) * std::numbers::ln2 + std::lgamma(l + 1.0) +
      0.5 * (std::log(n + 1.0) + std::lgamma(n - l + 1.0) -
             std::log(std::numbers::pi) - std::lgamma(n + l + 2.0));
  return std::exp(log_norm);
}

/// psi-dependent factor N(n, l) sin^l(psi) C_{n-l}^{l+1}(cos psi).
inline double hsh_radial(int n, int l, double psi) {
  const double norm = hsh_normalization(n, l);
  std::vector<double> seq(static_cast<std::size_t>(n - l) + 1);
  detail::gegenbauer_sequence(l + 1.0, std::cos(psi), seq);
  return detail::radial_value(norm, detail::int_pow(std::sin(psi), l),
                              seq.back());
}

/// Z_nl^m(phi, theta, psi).
inline double hsh(const HshIndex& idx, double phi, double theta, double psi) {
  if (!is_valid(idx)) {
    throw InvalidArgument("hsh: invalid index " + to_string(idx));
  }
  constexpr double kSlack = 1e-9;
  if (!std::isfinite(phi) || !(theta >= -kSlack && theta <= std::numbers::pi + kSlack) ||
      !(psi >= -kSlack && psi <= std::numbers::pi + kSlack)) {
    throw InvalidArgument("hsh: angles outside theta, psi in [0, pi]");
  }
  return hsh_radial(idx.n, idx.l, psi) * real_sh(idx.l, idx.m, phi, theta);
}

/// All admissible (n, l, m) with n <= n_max, l <= min(n, l_max),
/// |m| <= min(l, m_max), in canonical order. With psi_symmetric only
/// (n - l) even is kept.
inline IndexSet build_index_set(int n_max, int l_max, int m_max,
                                bool psi_symmetric) {
  if (m_max < 0 || l_max < m_max || n_max < l_max) {
    throw InvalidArgument("build_index_set: require n_max >= l_max >= m_max "
                          ">= 0, got " +
                          std::to_string(n_max) + ", " +
                          std::to_string(l_max) + ", " +
                          std::to_string(m_max));
  }
  detail::check_order(n_max);
  IndexSet set;
  set.n_max_ = n_max;
  set.l_max_ = l_max;
  set.m_max_ = m_max;
  set.psi_symmetric_ = psi_symmetric;
  for (int n = 0; n <= n_max; ++n) {
    for (int l = 0; l <= std::min(n, l_max); ++l) {
      if (psi_symmetric && (n - l) % 2 != 0) continue;
      const int mm = std::min(l, m_max);
      for (int m = -mm; m <= mm; ++m) set.indices_.push_back({n, l, m});
    }
  }
  return set;
}

/// Real SH values for every (l, m) with l <= order, |m| <= l, written to
/// out[sh_slot(l, m)]. out.size() must be sh_count(order).
inline void eval_sh_row(int order, double phi, double theta,
                        std::span<double> out) {
  if (order < 0 || out.size() != sh_count(order)) {
    throw InvalidArgument("eval_sh_row: output size does not match order");
  }
  const double x = std::cos(theta);
  const double s = std::sin(theta);
  std::vector<double> col(static_cast<std::size_t>(order) + 1);
  for (int am = 0; am <= order; ++am) {
    std::span<double> c(col.data(), static_cast<std::size_t>(order - am) + 1);
    detail::legendre_column(am, x, s, c);
    for (int l = am; l <= order; ++l) {
      const double p = c[static_cast<std::size_t>(l - am)];
      out[sh_slot(l, am)] =
          detail::sh_value(sh_normalization(l, am), p, detail::sh_trig(am, phi));
      if (am > 0) {
        out[sh_slot(l, -am)] = detail::sh_value(sh_normalization(l, -am), p,
                                                detail::sh_trig(-am, phi));
      }
    }
  }
}

inline std::vector<double> eval_sh_row(int order, double phi, double theta) {
  std::vector<double> out(sh_count(order));
  eval_sh_row(order, phi, theta, out);
  return out;
}

/// Radial factors for every (n, l) pair used by set, keyed as
/// out[n * (l_max + 1) + l]. Unused entries are left untouched.
inline void eval_radial_table(const IndexSet& set, double psi,
                              std::span<double> out) {
  const int lw = set.l_max() + 1;
  const double x = std::cos(psi);
  const double s = std::sin(psi);
  std::vector<double> seq(static_cast<std::size_t>(set.n_max()) + 1);
  for (int l = 0; l <= set.l_max(); ++l) {
    std::span<double> c(seq.data(), static_cast<std::size_t>(set.n_max() - l) + 1);
    detail::gegenbauer_sequence(l + 1.0, x, c);
    const double sp = detail::int_pow(s, l);
    for (int n = l; n <= set.n_max(); ++n) {
      if (set.psi_symmetric() && (n - l) % 2 != 0) continue;
      out[static_cast<std::size_t>(n * lw + l)] = detail::radial_value(
          hsh_normalization(n, l), sp, c[static_cast<std::size_t>(n - l)]);
    }
  }
}

/// One design-matrix row: out[j] = hsh(set[j], phi, theta, psi).
/// Intermediates are shared across indices; values are bit-identical to
/// per-index hsh() calls.
inline void eval_basis_row(const IndexSet& set, double phi, double theta,
                           double psi, std::span<double> out) {
  if (out.size() != set.size()) {
    throw InvalidArgument("eval_basis_row: output size does not match set");
  }
  if (set.size() == 0) return;
  std::vector<double> radial(
      static_cast<std::size_t>((set.n_max() + 1) * (set.l_max() + 1)));
  eval_radial_table(set, psi, radial);
  std::vector<double> sh(sh_count(set.l_max()));
  eval_sh_row(set.l_max(), phi, theta, sh);
  const int lw = set.l_max() + 1;
  for (std::size_t j = 0; j < set.size(); ++j) {
    const HshIndex& idx = set[j];
    out[j] = radial[static_cast<std::size_t>(idx.n * lw + idx.l)] *
             sh[sh_slot(idx.l, idx.m)];
  }
}

inline std::vector<double> eval_basis_row(const IndexSet& set, double phi,
                                          double theta, double psi) {
  std::vector<double> out(set.size());
  eval_basis_row(set, phi, theta, psi, out);
  return out;
}

}  // namespace hshrtf

#endif  // HSHRTF_BASIS_HPP_
