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

// Hyperspherical coordinates (phi, theta, psi) on the unit 3-sphere and the
// linear frequency-to-psi mapping that places [0, fs/2] on psi in [0, pi/2].
//
// Angle inputs that fall outside their range by no more than kAngleSlack are
// clamped onto the boundary; anything further out is rejected.

#ifndef HSHRTF_COORDS_HPP_
#define HSHRTF_COORDS_HPP_

#include <cmath>
#include <numbers>
#include <string>

#include "hshrtf/error.hpp"

namespace hshrtf {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kAngleSlack = 1e-9;

namespace detail {

// Clamps v into [lo, hi] if it is within kAngleSlack of the interval.
inline double clamp_closed(double v, double lo, double hi, const char* what) {
  if (!std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " is not finite");
  }
  if (v < lo) {
    if (v < lo - kAngleSlack) {
      throw InvalidArgument(std::string(what) + " = " + std::to_string(v) +
                            " is below " + std::to_string(lo));
    }
    return lo;
  }
  if (v > hi) {
    if (v > hi + kAngleSlack) {
      throw InvalidArgument(std::string(what) + " = " + std::to_string(v) +
                            " is above " + std::to_string(hi));
    }
    return hi;
  }
  return v;
}

// Azimuth in [0, 2pi). Values within slack of either end map to 0.
inline double clamp_azimuth(double phi) {
  if (!std::isfinite(phi)) throw InvalidArgument("phi is not finite");
  if (phi < 0.0) {
    if (phi < -kAngleSlack) {
      throw InvalidArgument("phi = " + std::to_string(phi) + " is negative");
    }
    return 0.0;
  }
  if (phi >= kTwoPi) {
    if (phi > kTwoPi + kAngleSlack) {
      throw InvalidArgument("phi = " + std::to_string(phi) +
                            " is not below 2*pi");
    }
    return 0.0;
  }
  return phi;
}

}  // namespace detail

// A point on the unit 3-sphere. The radius is fixed at 1.
class Direction4D {
 public:
  Direction4D(double phi, double theta, double psi)
      : phi_(detail::clamp_azimuth(phi)),
        theta_(detail::clamp_closed(theta, 0.0, kPi, "theta")),
        psi_(detail::clamp_closed(psi, 0.0, kPi, "psi")) {}

  double phi() const noexcept { return phi_; }
  double theta() const noexcept { return theta_; }
  double psi() const noexcept { return psi_; }

 private:
  double phi_;
  double theta_;
  double psi_;
};

enum class MappingMode { kLinearHalfSphere };

inline const char* to_string(MappingMode mode) {
  switch (mode) {
    case MappingMode::kLinearHalfSphere:
      return "linear-half-sphere";
  }
  return "unknown";
}

class FrequencyMapping {
 public:
  explicit FrequencyMapping(double sample_rate,
                            MappingMode mode = MappingMode::kLinearHalfSphere)
      : sample_rate_(sample_rate), mode_(mode) {
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
      throw InvalidArgument("sample rate must be positive and finite");
    }
  }

  double sample_rate() const noexcept { return sample_rate_; }
  double nyquist() const noexcept { return 0.5 * sample_rate_; }
  MappingMode mode() const noexcept { return mode_; }

 private:
  double sample_rate_;
  MappingMode mode_;
};

/// psi = pi f / fs. Frequencies within a relative 1e-9 of the band edges
/// are clamped.
inline double freq_to_psi(double f, const FrequencyMapping& mapping) {
  const double nyq = mapping.nyquist();
  if (!std::isfinite(f) || f < -kAngleSlack * nyq ||
      f > nyq * (1.0 + kAngleSlack)) {
    throw InvalidArgument("frequency " + std::to_string(f) +
                          " Hz outside [0, " + std::to_string(nyq) + "] Hz");
  }
  if (f <= 0.0) return 0.0;
  if (f >= nyq) return 0.5 * kPi;
  return kPi * f / mapping.sample_rate();
}

/// Inverse of freq_to_psi on [0, pi/2].
inline double psi_to_freq(double psi, const FrequencyMapping& mapping) {
  const double p = detail::clamp_closed(psi, 0.0, 0.5 * kPi, "psi");
  if (p == 0.5 * kPi) return mapping.nyquist();
  return p * mapping.sample_rate() / kPi;
}

struct Cartesian4 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 0.0;
};

/// x = rho sin(psi) sin(theta) sin(phi), y = rho sin(psi) sin(theta) cos(phi),
/// z = rho sin(psi) cos(theta), w = rho cos(psi).
/// Note x carries sin(phi) and y carries cos(phi).
inline Cartesian4 hcs_to_cartesian(double rho, const Direction4D& d) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw InvalidArgument("rho must be non-negative and finite");
  }
  const double sp = std::sin(d.psi());
  const double st = std::sin(d.theta());
  return {rho * sp * st * std::sin(d.phi()), rho * sp * st * std::cos(d.phi()),
          rho * sp * std::cos(d.theta()), rho * std::cos(d.psi())};
}

struct SphericalAngles {
  double phi = 0.0;
  double theta = 0.0;
};

/// Measurement convention (azimuth counterclockwise, elevation up-positive,
/// both in degrees) to azimuth/inclination in radians.
inline SphericalAngles angles_from_az_el(double azimuth_deg,
                                         double elevation_deg) {
  if (!std::isfinite(azimuth_deg)) {
    throw InvalidArgument("azimuth is not finite");
  }
  const double el = detail::clamp_closed(elevation_deg, -90.0, 90.0,
                                         "elevation (degrees)");
  double phi = std::fmod(azimuth_deg * kPi / 180.0, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  if (phi >= kTwoPi) phi = 0.0;
  return {phi, 0.5 * kPi - el * kPi / 180.0};
}

}  // namespace hshrtf

#endif  // HSHRTF_COORDS_HPP_
