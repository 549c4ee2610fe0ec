#pragma once

#include <cmath>
#include <numbers>

namespace mfca {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Reduces an angle to [0, 2π) with floor-based modular arithmetic.
inline double wrap_angle(double a) {
  double r = a - kTwoPi * std::floor(a / kTwoPi);
  if (r >= kTwoPi) r = 0.0;
  if (r < 0.0) r = 0.0;
  return r;
}

// Signed distance between two angles, in (-π, π].
inline double angle_difference(double a, double b) {
  double d = wrap_angle(a - b);
  return d > kPi ? d - kTwoPi : d;
}

inline double deg(double rad) { return rad * 180.0 / kPi; }
inline double rad(double degrees) { return degrees * kPi / 180.0; }

}  // namespace mfca
