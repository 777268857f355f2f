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


#include "hshrtf/basis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "test_util.hpp"

namespace hshrtf {
namespace {

using hshrtf_test::kPi;

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

TEST(Gegenbauer, KnownValues) {
  EXPECT_EQ(gegenbauer(0, 3.0, 0.7), 1.0);
  EXPECT_NEAR(gegenbauer(1, 2.0, 0.25), 1.0, 1e-15);
  EXPECT_NEAR(gegenbauer(2, 1.0, 0.5), 0.0, 1e-15);
}

TEST(Gegenbauer, RejectsBadArguments) {
  EXPECT_THROW(gegenbauer(-1, 1.0, 0.0), InvalidArgument);
  EXPECT_THROW(gegenbauer(2, 0.0, 0.0), InvalidArgument);
  EXPECT_THROW(gegenbauer(2, 1.0, NAN), InvalidArgument);
}

TEST(Gegenbauer, MatchesClosedForms) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), ua(0.5, 10.0);
  for (int i = 0; i < 20; ++i) {
    const double x = ux(rng), a = ua(rng);
    for (int nu = 0; nu <= 4; ++nu) {
      EXPECT_LE(rel_err(gegenbauer(nu, a, x), hshrtf_test::gegenbauer_closed(nu, a, x)),
                1e-12) << "nu=" << nu << " a=" << a << " x=" << x;
    }
  }
}

TEST(AssocLegendre, KnownValues) {
  EXPECT_NEAR(assoc_legendre(2, 1, 0.5), 3.0 * 0.5 * std::sqrt(0.75), 1e-14);
  EXPECT_EQ(assoc_legendre(0, 0, 0.3), 1.0);
  EXPECT_THROW(assoc_legendre(2, 3, 0.0), InvalidArgument);
  EXPECT_THROW(assoc_legendre(2, -1, 0.0), InvalidArgument);
  EXPECT_THROW(assoc_legendre(2, 1, 1.5), InvalidArgument);
}

TEST(AssocLegendre, MatchesClosedForms) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double x = ux(rng);
    for (int l = 0; l <= 4; ++l) {
      for (int m = 0; m <= l; ++m) {
        EXPECT_LE(rel_err(assoc_legendre(l, m, x), hshrtf_test::legendre_closed(l, m, x)),
                  1e-12) << "l=" << l << " m=" << m << " x=" << x;
      }
    }
  }
}

TEST(ShNormalization, KnownValues) {
  EXPECT_NEAR(sh_normalization(0, 0), 0.2820948, 1e-7);
  EXPECT_NEAR(sh_normalization(1, 0), 0.4886025, 1e-7);
  // (2 - 0) * 3 / (4 pi) * 0! / 2! = 3 / (4 pi).
  EXPECT_NEAR(sh_normalization(1, 1), std::sqrt(3.0 / (4.0 * kPi)), 1e-15);
  EXPECT_EQ(sh_normalization(1, -1), sh_normalization(1, 1));
}

TEST(RealSh, KnownValues) {
  EXPECT_NEAR(real_sh(0, 0, 1.2, 2.1), 0.2820948, 1e-7);
  EXPECT_NEAR(real_sh(1, 0, 0.0, 0.0), 0.4886025, 1e-7);
}

TEST(RealSh, OrthonormalOnSphere) {
  constexpr int kOrder = 4;
  const auto gl = hshrtf_test::gauss_legendre(32);
  const int nphi = 64;
  const std::size_t s = sh_count(kOrder);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(s, s);
  for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
    const double theta = std::acos(gl.nodes[a]);
    for (int p = 0; p < nphi; ++p) {
      const double phi = 2.0 * kPi * p / nphi;
      const auto row = eval_sh_row(kOrder, phi, theta);
      const Eigen::Map<const Eigen::VectorXd> v(row.data(), s);
      g += gl.weights[a] * (2.0 * kPi / nphi) * v * v.transpose();
    }
  }
  EXPECT_LE((g - Eigen::MatrixXd::Identity(s, s)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HshNormalization, KnownValues) {
  EXPECT_NEAR(hsh_normalization(0, 0), std::sqrt(2.0 / kPi), 1e-15);
  EXPECT_NEAR(hsh(HshIndex{0, 0, 0}, 0.3, 1.0, 2.0), 1.0 / (std::sqrt(2.0) * kPi),
              1e-15);
}

TEST(Hsh, KnownValueAtEquator) {
  const double v = hsh(HshIndex{2, 0, 0}, 0.4, 1.1, kPi / 2);
  EXPECT_NEAR(v, -hsh_normalization(2, 0) * sh_normalization(0, 0), 1e-14);
}

// Product rule: Gauss-Legendre in cos(theta), uniform in phi, Gauss-Legendre
// in psi with the sin^2(psi) factor folded into the weight.
TEST(Hsh, OrthonormalOnThreeSphere) {
  const auto set = build_index_set(4, 4, 4, false);
  const auto gt = hshrtf_test::gauss_legendre(64);
  const auto gp = hshrtf_test::gauss_legendre(128, 0.0, kPi);
  constexpr int kPhi = 128;
  const std::size_t n = set.size();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd v(n);
  for (std::size_t c = 0; c < gp.nodes.size(); ++c) {
    const double psi = gp.nodes[c];
    const double wpsi = gp.weights[c] * std::sin(psi) * std::sin(psi);
    for (std::size_t a = 0; a < gt.nodes.size(); ++a) {
      const double theta = std::acos(gt.nodes[a]);
      const double w = wpsi * gt.weights[a] * 2.0 * kPi / kPhi;
      for (int p = 0; p < kPhi; ++p) {
        const double phi = 2.0 * kPi * p / kPhi;
        for (std::size_t j = 0; j < n; ++j) v[j] = hsh(set[j], phi, theta, psi);
        g.selfadjointView<Eigen::Lower>().rankUpdate(v, w);
      }
    }
  }
  g = g.selfadjointView<Eigen::Lower>();
  EXPECT_LE((g - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Hsh, ParityAboutEquator) {
  const auto set = build_index_set(8, 6, 6, false);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double phi = 2 * kPi * u(rng), theta = kPi * u(rng), psi = kPi * u(rng);
    for (const auto& idx : set) {
      const double a = hsh(idx, phi, theta, psi);
      const double b = hsh(idx, phi, theta, kPi - psi);
      const double expect = (idx.n - idx.l) % 2 == 0 ? a : -a;
      EXPECT_LE(std::abs(b - expect), 1e-12 * std::max(1.0, std::abs(a)))
          << to_string(idx);
    }
  }
}

TEST(Hsh, HyperpoleOnlyLZeroSurvives) {
  const auto set = build_index_set(10, 6, 6, false);
  for (const auto& idx : set) {
    const double a = hsh(idx, 0.3, 0.4, 0.0);
    const double b = hsh(idx, 4.0, 2.5, 0.0);
    if (idx.l == 0) {
      EXPECT_NE(a, 0.0);
      EXPECT_EQ(a, b);
    } else {
      EXPECT_EQ(a, 0.0) << to_string(idx);
    }
  }
}

TEST(Hsh, RejectsInvalidIndexAndAngles) {
  EXPECT_THROW(hsh(HshIndex{1, 2, 0}, 0, 0, 0), InvalidArgument);
  EXPECT_THROW(hsh(HshIndex{2, 1, 2}, 0, 0, 0), InvalidArgument);
  EXPECT_THROW(hsh(HshIndex{1, 0, 0}, 0, 0, 4.0), InvalidArgument);
  EXPECT_THROW(hsh(HshIndex{201, 0, 0}, 0, 0, 1.0), RangeError);
}

TEST(Hsh, HighOrderStaysFinite) {
  for (int n : {80, 120, 200}) {
    for (double psi : {0.01, 0.7, 1.5, kPi / 2}) {
      EXPECT_TRUE(std::isfinite(hsh(HshIndex{n, 8, -3}, 1.0, 1.0, psi)));
    }
  }
}

TEST(IndexSet, Counts) {
  EXPECT_EQ(build_index_set(80, 8, 8, true).size(), 3081u);
  EXPECT_EQ(build_index_set(0, 0, 0, true).size(), 1u);
  EXPECT_EQ(build_index_set(2, 2, 2, true).size(), 10u);
  // Non-symmetric (L, L, L) has the 4D harmonic count sum (n+1)^2.
  EXPECT_EQ(build_index_set(4, 4, 4, false).size(), 55u);
}

TEST(IndexSet, EnumerationMatchesBruteForce) {
  for (bool sym : {true, false}) {
    const auto set = build_index_set(9, 5, 3, sym);
    std::vector<HshIndex> expect;
    for (int n = 0; n <= 9; ++n)
      for (int l = 0; l <= std::min(n, 5); ++l)
        for (int m = -std::min(l, 3); m <= std::min(l, 3); ++m)
          if (!sym || (n - l) % 2 == 0) expect.push_back({n, l, m});
    ASSERT_EQ(set.size(), expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      EXPECT_EQ(set[i], expect[i]);
      EXPECT_EQ(set.find(expect[i]), i);
    }
    EXPECT_FALSE(set.find(HshIndex{10, 0, 0}).has_value());
  }
}

TEST(IndexSet, MonotoneInN) {
  for (bool sym : {true, false}) {
    for (int l = 0; l <= 4; ++l) {
      for (int n = l; n < 20; ++n) {
        const auto a = build_index_set(n, l, l, sym).size();
        const auto b = build_index_set(n + 1, l, l, sym).size();
        if (sym && l == 0 && n % 2 == 0) {
          // n + 1 has odd n - 0, so a symmetric set with l_max = 0 gains nothing.
          EXPECT_EQ(b, a);
        } else {
          EXPECT_GT(b, a) << "n=" << n << " l=" << l << " sym=" << sym;
        }
      }
    }
  }
}

TEST(IndexSet, RejectsBadBounds) {
  EXPECT_THROW(build_index_set(2, 3, 1, true), InvalidArgument);
  EXPECT_THROW(build_index_set(3, 2, 3, true), InvalidArgument);
  EXPECT_THROW(build_index_set(2, 1, -1, true), InvalidArgument);
  EXPECT_THROW(build_index_set(201, 8, 8, true), RangeError);
}

TEST(EvalBasisRow, MatchesPointwise) {
  const auto set = build_index_set(12, 6, 4, false);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double phi = 2 * kPi * u(rng), theta = kPi * u(rng), psi = kPi * u(rng);
    const auto row = eval_basis_row(set, phi, theta, psi);
    for (std::size_t j = 0; j < set.size(); ++j) {
      EXPECT_NEAR(row[j], hsh(set[j], phi, theta, psi),
                  1e-13 * std::max(1.0, std::abs(row[j])));
    }
  }
  const auto single = eval_basis_row(build_index_set(0, 0, 0, true), 0.1, 0.2, 0.3);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_NEAR(single[0], 0.2250791, 1e-7);
}

TEST(EvalShRow, SlotsMatchRealSh) {
  const auto row = eval_sh_row(5, 1.3, 0.9);
  for (int l = 0; l <= 5; ++l)
    for (int m = -l; m <= l; ++m)
      EXPECT_NEAR(row[sh_slot(l, m)], real_sh(l, m, 1.3, 0.9), 1e-14);
}

}  // namespace
}  // namespace hshrtf
