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

// Builds a smooth synthetic magnitude field, fits a small HSH model to it and
// prints the decoded value next to the target at a few points.

#include <cmath>
#include <cstdio>
#include <vector>

#include "hshrtf/hshrtf.hpp"

namespace {

double target_db(double phi, double theta, double f) {
  const double x = f / 24000.0;
  // Directional terms fade out towards 0 Hz, where every HSH model is
  // direction independent.
  return (3.0 * std::sin(theta) * std::cos(phi) + 2.0 * std::cos(theta)) * x -
         6.0 * x * x;
}

}  // namespace

int main() {
  constexpr double kFs = 48000.0;
  constexpr int kBins = 33;

  std::vector<hshrtf::SphericalAngles> dirs;
  for (int el = -60; el <= 90; el += 15) {
    const int step = el == 90 ? 360 : 20;
    for (int az = 0; az < 360; az += step) {
      dirs.push_back(hshrtf::angles_from_az_el(az, el));
    }
  }
  Eigen::MatrixXd mags(static_cast<Eigen::Index>(dirs.size()), kBins);
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    for (int b = 0; b < kBins; ++b) {
      const double f = 0.5 * kFs * b / (kBins - 1);
      mags(static_cast<Eigen::Index>(d), b) =
          target_db(dirs[d].phi, dirs[d].theta, f);
    }
  }
  const auto data = hshrtf::dataset_from_grid(kFs, dirs, mags);
  const auto set = hshrtf::build_index_set(10, 3, 3, true);
  const auto fit = hshrtf::fit_hsh(
      data, set, hshrtf::build_weights(data, hshrtf::WeightingSpec::uniform()));

  std::printf("%zu coefficients, weighted rss %.3g dB^2\n", set.size(),
              fit.report.weighted_rss);
  const double probes[][3] = {{30, 0, 6000}, {90, 45, 8000}, {200, -30, 16000}};
  for (const auto& p : probes) {
    const auto a = hshrtf::angles_from_az_el(p[0], p[1]);
    std::printf("az %5.1f el %5.1f f %7.1f: model %8.4f dB, target %8.4f dB\n",
                p[0], p[1], p[2], hshrtf::decode(fit.model, a.phi, a.theta, p[2]),
                target_db(a.phi, a.theta, p[2]));
  }
  return 0;
}
