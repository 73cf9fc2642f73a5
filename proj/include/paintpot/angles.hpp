#pragma once

#include <cmath>
#include <numbers>

namespace paintpot {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  constexpr double width() const noexcept { return hi - lo; }
};

/// Reduces an angle into the half-open chart (-pi, pi]. -pi maps to pi.
inline double wrap_angle(double a) noexcept {
  if (a > -kPi && a <= kPi) return a;
  double r = std::fmod(a + kPi, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r - kPi;
}

/// Shortest signed difference a - b, in (-pi, pi].
inline double angle_diff(double a, double b) noexcept { return wrap_angle(a - b); }

}  // namespace paintpot
