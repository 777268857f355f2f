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


// Drives the hshrtf executable end to end on a small synthetic HRIR set.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "hshrtf/hshrtf.hpp"
#include "test_util.hpp"

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = hshrtf_test::scratch_dir("cli");
    // Decaying noise with a direction-dependent gain: smooth enough to fit.
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    hshrtf::HrirSet set;
    set.sample_rate = 32000;
    set.ir_length = 64;
    for (int el = -40; el <= 80; el += 20) {
      for (int az = 0; az < 360; az += 30) set.directions.push_back({double(az), double(el)});
    }
    set.directions.push_back({0, 90});
    set.impulses = Eigen::MatrixXd(set.directions.size(), 64);
    for (std::size_t d = 0; d < set.directions.size(); ++d) {
      const double gain = 1.5 + std::cos(set.directions[d].azimuth_deg * 0.0174533);
      for (int t = 0; t < 64; ++t) {
        set.impulses(static_cast<Eigen::Index>(d), t) = gain * std::exp(-t / 6.0) * g(rng);
      }
    }
    std::ofstream out(dir_ / "toy.csv");
    hshrtf::write_hrir_csv(out, set);
  }

  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static int run(const std::string& args) {
    const std::string cmd = std::string(HSHRTF_CLI_PATH) + " " + args + " > " +
                            (dir_ / "stdout.txt").string() + " 2> " +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::string p(const std::string& name) { return (dir_ / name).string(); }

  static std::string encode_args(const std::string& out) {
    return "encode " + p("toy.csv") + " -o " + p(out) +
           " --n-max 10 --l-max 4 --m-max 4 --drop-bins 1 --taper-start 14000";
  }

  static inline fs::path dir_;
};

TEST_F(CliTest, EncodeWritesModelAndManifest) {
  ASSERT_EQ(run(encode_args("a.hshc")), 0) << read(dir_ / "stderr.txt");
  const auto m = hshrtf::load_model(p("a.hshc"));
  EXPECT_EQ(m.index_set(), hshrtf::build_index_set(10, 4, 4, true));
  EXPECT_EQ(m.sample_rate(), 32000.0);
  EXPECT_EQ(m.provenance().at("source.name"), "toy.csv");
  EXPECT_EQ(m.provenance().at("fit.solver"), "factored");
  EXPECT_EQ(m.provenance().at("source.digest").rfind("crc32:", 0), 0u);

  const auto j = nlohmann::json::parse(read(p("a.hshc.manifest.json")));
  EXPECT_EQ(j["command"], "encode");
  EXPECT_EQ(j["tool_version"], hshrtf::kVersion);
  for (const char* key : {"n_max", "l_max", "m_max", "symmetric", "weighting",
                          "drop_bins", "taper_start", "db_floor", "threads", "output"}) {
    EXPECT_TRUE(j["parameters"].contains(key)) << key;
  }
  EXPECT_EQ(j["parameters"]["n_max"], 10);
  EXPECT_EQ(j["parameters"]["drop_bins"], 1);
  EXPECT_EQ(j["inputs"]["hrir"]["digest"].get<std::string>().size(), 14u);
  EXPECT_TRUE(j.contains("timestamp"));
}

TEST_F(CliTest, RunsAreDeterministic) {
  ASSERT_EQ(run(encode_args("d1.hshc")), 0);
  ASSERT_EQ(run("--threads 3 " + encode_args("d2.hshc")), 0);
  EXPECT_EQ(read(p("d1.hshc")), read(p("d2.hshc")));
  ASSERT_EQ(run("sh-encode " + p("toy.csv") + " -o " + p("d1.shmb") + " --order 3"), 0);
  ASSERT_EQ(run("sh-encode " + p("toy.csv") + " -o " + p("d2.shmb") + " --order 3"), 0);
  EXPECT_EQ(read(p("d1.shmb")), read(p("d2.shmb")));
}

TEST_F(CliTest, DecodePointAndGrid) {
  ASSERT_EQ(run(encode_args("b.hshc")), 0);
  ASSERT_EQ(run("decode " + p("b.hshc") + " --az 30 --el 10 --freq 1000 -o " + p("pt.csv")), 0)
      << read(dir_ / "stderr.txt");
  const auto m = hshrtf::load_model(p("b.hshc"));
  const auto a = hshrtf::angles_from_az_el(30, 10);
  std::istringstream pt(read(p("pt.csv")));
  std::string header, row;
  std::getline(pt, header);
  std::getline(pt, row);
  EXPECT_EQ(header, "azimuth_deg,elevation_deg,freq_hz,magnitude_db");
  const double v = std::stod(row.substr(row.rfind(',') + 1));
  EXPECT_NEAR(v, hshrtf::decode(m, a.phi, a.theta, 1000), 1e-10);
  EXPECT_TRUE(fs::exists(p("pt.csv.manifest.json")));

  ASSERT_EQ(run("decode " + p("b.hshc") + " --grid '0:90:270 x -30:30:30 x 0:4000:16000' --linear -o " +
                p("grid.csv")), 0) << read(dir_ / "stderr.txt");
  std::istringstream grid(read(p("grid.csv")));
  std::getline(grid, header);
  EXPECT_EQ(header, "azimuth_deg,elevation_deg,freq_hz,magnitude_linear");
  int rows = 0;
  for (std::string line; std::getline(grid, line);) ++rows;
  EXPECT_EQ(rows, 4 * 3 * 5);

  EXPECT_EQ(run("decode " + p("b.hshc") + " --az 0 --el 0 --freq 17000 -o " + p("x.csv")), 2);
  EXPECT_EQ(run("decode " + p("b.hshc") + " --az 0 --el 0 -o " + p("x.csv")), 2);
  EXPECT_EQ(run("decode " + p("b.hshc") + " --grid '0:1 x 0 x 0' -o " + p("x.csv")), 2);
}

TEST_F(CliTest, CompareAndInfo) {
  ASSERT_EQ(run(encode_args("c.hshc")), 0);
  ASSERT_EQ(run("sh-encode " + p("toy.csv") + " -o " + p("c.shmb") + " --order 3"), 0);
  ASSERT_EQ(run("compare " + p("toy.csv") + " " + p("c.hshc") + " " + p("c.shmb") +
                " --f-lo 100 --f-hi 15000 -o " + p("report")), 0)
      << read(dir_ / "stderr.txt");
  for (const char* f : {"rms_hsh.csv", "rms_sh.csv", "p95_hsh.csv", "p95_sh.csv",
                        "rms_diff.csv", "p5_diff.csv", "p95_diff.csv", "summary.csv",
                        "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "report" / f)) << f;
  }
  EXPECT_NE(read(dir_ / "report" / "summary.csv").find("sd_hsh_db"), std::string::npos);
  const auto j = nlohmann::json::parse(read(dir_ / "report" / "manifest.json"));
  EXPECT_EQ(j["parameters"]["f_hi"], 15000.0);
  EXPECT_TRUE(j["inputs"].contains("sh_model"));

  // Default band limits.
  ASSERT_EQ(run("compare " + p("toy.csv") + " " + p("c.hshc") + " " + p("c.shmb") +
                " -o " + p("report2")), 0);

  ASSERT_EQ(run("info " + p("c.hshc")), 0);
  const auto info = read(dir_ / "stdout.txt");
  EXPECT_NE(info.find("n_max: 10"), std::string::npos);
  EXPECT_NE(info.find("mapping: linear-half-sphere"), std::string::npos);
  ASSERT_EQ(run("info " + p("c.shmb")), 0);
  EXPECT_NE(read(dir_ / "stdout.txt").find("sh_order: 3"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("encode"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("encode " + p("toy.csv") + " -o " + p("e.hshc") + " --n-max 2 --l-max 3"), 2);

  std::ofstream(p("broken.csv")) << "# hrir-csv v1\n# fs=32000\n# n=4\n0,0,1,2,3\n";
  EXPECT_EQ(run("encode " + p("broken.csv") + " -o " + p("e.hshc")), 3);
  EXPECT_NE(read(dir_ / "stderr.txt").find("broken.csv:4"), std::string::npos);
  EXPECT_EQ(run("encode " + p("missing.csv") + " -o " + p("e.hshc")), 3);
  std::ofstream(p("junk.hshc")) << "not a model";
  EXPECT_EQ(run("info " + p("junk.hshc")), 3);

  // 3081 coefficients from 85 x 33 samples.
  EXPECT_EQ(run("encode " + p("toy.csv") + " -o " + p("e.hshc") + " --taper-start 14000"), 4);
  // Default taper start (20 kHz) lies above this set's 16 kHz Nyquist.
  EXPECT_EQ(run("encode " + p("toy.csv") + " -o " + p("e.hshc")), 2);

  ASSERT_EQ(run(encode_args("f.hshc")), 0);
  ASSERT_EQ(run("sh-encode " + p("toy.csv") + " -o " + p("f.shmb") + " --order 2"), 0);
  std::ofstream(p("other.csv")) << "# hrir-csv v1\n# fs=44100\n# n=4\n0,0,1,0,0,0\n";
  EXPECT_EQ(run("compare " + p("other.csv") + " " + p("f.hshc") + " " + p("f.shmb") +
                " -o " + p("bad")), 3);
}

}  // namespace
