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


#include "hshrtf/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "test_util.hpp"

namespace hshrtf {
namespace {

using hshrtf_test::kPi;

std::string data_path(const char* name) {
  return std::string(HSHRTF_TEST_DATA_DIR) + "/" + name;
}

CoefficientSet random_model(std::mt19937_64& rng, const IndexSet& set,
                            double fs = 44100) {
  std::normal_distribution<double> g;
  std::vector<double> c(set.size());
  for (double& x : c) x = g(rng);
  return CoefficientSet(set, c, fs, MappingMode::kLinearHalfSphere,
                        {{"source.name", "random"}, {"fit.solver", "none"}});
}

CoefficientSet golden_hsh() {
  return CoefficientSet(build_index_set(2, 1, 1, true),
                        {0.5, -1.25, 2.0, 0.125, -3.0}, 48000,
                        MappingMode::kLinearHalfSphere,
                        {{"source.name", "golden"}});
}

ShModel golden_sh() {
  Eigen::MatrixXd c(2, 4);
  for (int k = 0; k < 8; ++k) c(k / 4, k % 4) = 0.25 * k - 1;
  return ShModel(1, 44100, c, {{"source.name", "golden"}});
}

TEST(Crc32, CheckValue) {
  const std::string s = "123456789";
  EXPECT_EQ(crc32({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}),
            0xCBF43926u);
  EXPECT_EQ(crc32({}), 0u);
}

TEST(CoefficientSet, Validates) {
  const auto set = build_index_set(1, 1, 1, true);
  EXPECT_THROW(CoefficientSet(set, {1.0}, 44100), InvalidArgument);
  EXPECT_THROW(CoefficientSet(set, {1.0, NAN}, 44100), InvalidArgument);
  EXPECT_THROW(CoefficientSet(set, {1.0, 2.0}, 0.0), InvalidArgument);
  const CoefficientSet m(set, {1.0, 2.0, 3.0, 4.0}, 44100);
  EXPECT_EQ(m.coefficient(HshIndex{1, 1, 0}), 3.0);
  EXPECT_EQ(m.coefficient(HshIndex{5, 1, 0}), 0.0);
}

TEST(Decode, ConstantModel) {
  const double z00 = 1.0 / (std::sqrt(2.0) * kPi);
  const CoefficientSet m(build_index_set(0, 0, 0, true), {1.0 / z00}, 44100);
  for (double f : {0.0, 1000.0, 22050.0}) {
    EXPECT_NEAR(decode(m, 1.0, 2.0, f), 1.0, 1e-14);
  }
  EXPECT_THROW(decode(m, 0, 0, 22100.0), InvalidArgument);
  EXPECT_THROW(decode(m, 0, 4.0, 100.0), InvalidArgument);
}

TEST(Decode, MatchesBasisSum) {
  std::mt19937_64 rng(1);
  const auto set = build_index_set(9, 5, 3, false);
  const auto m = random_model(rng, set);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double phi = 2 * kPi * u(rng), theta = kPi * u(rng), f = 22050 * u(rng);
    double expect = 0;
    for (std::size_t j = 0; j < set.size(); ++j) {
      expect += m.coefficients()[j] * hsh(set[j], phi, theta, kPi * f / 44100);
    }
    EXPECT_NEAR(decode(m, phi, theta, f), expect, 1e-12);
  }
}

TEST(Decode, HyperpoleInvarianceAtZeroFrequency) {
  std::mt19937_64 rng(2);
  const auto m = random_model(rng, build_index_set(20, 8, 8, true));
  const auto dirs = hshrtf_test::random_directions(rng, 100);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& d : dirs) {
    const double v = decode(m, d.phi, d.theta, 0.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_LE(hi - lo, 1e-12 * std::max(1.0, std::abs(hi)));
}

TEST(Decode, SymmetricModelIsEvenAboutEquator) {
  std::mt19937_64 rng(3);
  const auto m = random_model(rng, build_index_set(20, 8, 8, true));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Direction4D a(2 * kPi * u(rng), kPi * u(rng), kPi * u(rng));
    const Direction4D b(a.phi(), a.theta(), kPi - a.psi());
    const double va = evaluate(m, a), vb = evaluate(m, b);
    EXPECT_LE(std::abs(va - vb), 1e-12 * std::max(1.0, std::abs(va)));
  }
}

TEST(Decode, FlatAtNyquist) {
  std::mt19937_64 rng(4);
  const auto m = random_model(rng, build_index_set(20, 8, 8, true));
  const double h = 1e-4;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double phi = 2 * kPi * u(rng), theta = kPi * u(rng);
    const double d = (evaluate(m, {phi, theta, kPi / 2 + h}) -
                      evaluate(m, {phi, theta, kPi / 2 - h})) / (2 * h);
    EXPECT_LE(std::abs(d), 1e-6);
  }
}

TEST(Decode, LinearInCoefficients) {
  std::mt19937_64 rng(5);
  const auto set = build_index_set(6, 3, 3, false);
  const auto a = random_model(rng, set), b = random_model(rng, set);
  std::vector<double> sum(set.size());
  for (std::size_t j = 0; j < set.size(); ++j) {
    sum[j] = 2 * a.coefficients()[j] - b.coefficients()[j];
  }
  const CoefficientSet s(set, sum, 44100);
  EXPECT_NEAR(decode(s, 1, 1, 5000), 2 * decode(a, 1, 1, 5000) - decode(b, 1, 1, 5000),
              1e-12);
}

TEST(DecodeGrid, MatchesPointwise) {
  std::mt19937_64 rng(6);
  const auto m = random_model(rng, build_index_set(30, 8, 6, true));
  const auto dirs = hshrtf_test::random_directions(rng, 25);
  std::vector<SphericalAngles> sa;
  for (const auto& d : dirs) sa.push_back({d.phi, d.theta});
  std::vector<double> freqs;
  for (int k = 0; k <= 32; ++k) freqs.push_back(22050.0 * k / 32);
  const Eigen::MatrixXd g = decode_grid(m, sa, freqs);
  ASSERT_EQ(g.rows(), 25);
  ASSERT_EQ(g.cols(), 33);
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j < 33; ++j)
      EXPECT_NEAR(g(i, j), decode(m, sa[i].phi, sa[i].theta, freqs[j]), 1e-10);
  const std::vector<SphericalAngles> one = {sa[0]};
  const std::vector<double> f1 = {1234.5};
  EXPECT_EQ(decode_grid(m, one, f1)(0, 0), decode_grid(m, one, f1)(0, 0));
  EXPECT_NEAR(decode_grid(m, one, f1)(0, 0), decode(m, sa[0].phi, sa[0].theta, 1234.5),
              1e-10);
  const auto empty = decode_grid(m, {}, {});
  EXPECT_EQ(empty.size(), 0);
  const std::vector<double> bad = {30000.0};
  EXPECT_THROW(decode_grid(m, one, bad), InvalidArgument);
}

TEST(DecodeSh, Basics) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(3, 4);
  c(0, 0) = 1.0;
  c(1, sh_slot(1, 0)) = 1.0;
  const ShModel m(1, 44100, c);
  EXPECT_NEAR(decode_sh(m, 0.3, 0.7, 0), sh_normalization(0, 0), 1e-15);
  EXPECT_NEAR(decode_sh(m, 0.3, 0.7, 1), sh_normalization(1, 0) * std::cos(0.7), 1e-15);
  EXPECT_THROW(decode_sh(m, 0, 0, 3), InvalidArgument);
  EXPECT_THROW(decode_sh(m, 0, 0, -1), InvalidArgument);
  const std::vector<SphericalAngles> dirs = {{0.3, 0.7}, {2.0, 2.5}};
  const auto g = decode_sh_grid(m, dirs);
  EXPECT_NEAR(g(1, 1), decode_sh(m, 2.0, 2.5, 1), 1e-15);
  EXPECT_THROW(ShModel(1, 44100, Eigen::MatrixXd::Zero(3, 5)), InvalidArgument);
}

TEST(Serialization, HshRoundTripIsBitwise) {
  std::mt19937_64 rng(7);
  const auto m = random_model(rng, build_index_set(80, 8, 8, true));
  const auto bytes = serialize(m);
  const auto back = deserialize_coefficient_set(bytes);
  ASSERT_EQ(back.coefficients().size(), 3081u);
  EXPECT_EQ(std::memcmp(back.coefficients().data(), m.coefficients().data(),
                        3081 * sizeof(double)), 0);
  EXPECT_EQ(back.index_set(), m.index_set());
  EXPECT_EQ(back.sample_rate(), m.sample_rate());
  EXPECT_EQ(back.provenance(), m.provenance());
  EXPECT_EQ(serialize(back), bytes);

  const auto dir = hshrtf_test::scratch_dir("model");
  const auto path = (dir / "m.hshc").string();
  save_model(m, path);
  EXPECT_EQ(serialize(load_model(path)), bytes);
  std::filesystem::remove_all(dir);
}

TEST(Serialization, ShRoundTripIsBitwise) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  Eigen::MatrixXd c(257, 81);
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = g(rng);
  const ShModel m(8, 44100, c, {{"k", "v=w"}});
  const auto bytes = serialize(m);
  const auto back = deserialize_sh_model(bytes);
  EXPECT_EQ(back.coefficients(), c);
  EXPECT_EQ(back.coefficient_count(), 20817u);
  EXPECT_EQ(back.provenance().at("k"), "v=w");
  EXPECT_EQ(serialize(back), bytes);
}

std::string error_of(const std::vector<std::uint8_t>& bytes, bool sh = false) {
  try {
    if (sh) {
      deserialize_sh_model(bytes);
    } else {
      deserialize_coefficient_set(bytes);
    }
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

TEST(Serialization, DetectsCorruption) {
  const auto good = serialize(golden_hsh());
  auto bad = good;
  bad[0] = 'X';
  EXPECT_NE(error_of(bad).find("bad magic, expected 'HSHC'"), std::string::npos);
  EXPECT_NE(error_of(serialize(golden_sh())).find("bad magic"), std::string::npos);

  bad = good;
  bad[4] = 999 & 0xFF;
  bad[5] = 999 >> 8;
  EXPECT_NE(error_of(bad).find("unsupported format version 999"), std::string::npos);

  bad = good;
  bad[30] ^= 0x01;  // inside the coefficients
  EXPECT_NE(error_of(bad).find("checksum mismatch"), std::string::npos);

  bad = good;
  bad.back() ^= 0x80;  // the stored CRC itself
  EXPECT_NE(error_of(bad).find("checksum mismatch"), std::string::npos);

  bad.assign(good.begin(), good.begin() + 40);
  EXPECT_NE(error_of(bad).find("truncated"), std::string::npos);

  bad = good;
  bad.push_back(0);
  EXPECT_NE(error_of(bad).find("trailing"), std::string::npos);

  auto sh = serialize(golden_sh());
  sh[40] ^= 0x10;  // inside the coefficients
  EXPECT_NE(error_of(sh, true).find("checksum mismatch"), std::string::npos);
}

TEST(Serialization, GoldenBytes) {
  const auto hshc = read_file_bytes(data_path("golden.hshc"));
  EXPECT_EQ(serialize(golden_hsh()), hshc);
  const auto back = deserialize_coefficient_set(hshc);
  EXPECT_EQ(back.coefficient(HshIndex{2, 0, 0}), -3.0);
  EXPECT_EQ(back.provenance().at("source.name"), "golden");

  const auto shmb = read_file_bytes(data_path("golden.shmb"));
  EXPECT_EQ(serialize(golden_sh()), shmb);
  EXPECT_EQ(deserialize_sh_model(shmb).coefficients(), golden_sh().coefficients());
}

TEST(Serialization, MetadataRules) {
  EXPECT_THROW(serialize(CoefficientSet(build_index_set(0, 0, 0, true), {1.0}, 8000,
                                        MappingMode::kLinearHalfSphere,
                                        {{"mapping", "x"}})),
               InvalidArgument);
  EXPECT_THROW(serialize(CoefficientSet(build_index_set(0, 0, 0, true), {1.0}, 8000,
                                        MappingMode::kLinearHalfSphere,
                                        {{"a", "line\nbreak"}})),
               InvalidArgument);
  EXPECT_THROW(load_model("/nonexistent/file.hshc"), FormatError);
}

}  // namespace
}  // namespace hshrtf
