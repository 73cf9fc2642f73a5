#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "paintpot/angles.hpp"
#include "paintpot/error.hpp"

namespace paintpot {

/// Third-order polynomial angle = c3 V^3 + c2 V^2 + c1 V + c0 over an ADC-count window.
///
/// For wheel wipers the angle is the shifted (continuous) angle of that wiper;
/// for tilt sensors it is the joint angle itself. The model is only meaningful
/// on `v_window`, where it is required to be strictly monotone.
struct CubicModel {
  double c3 = 0.0;
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;
  Interval v_window{0.0, 1023.0};

  double operator()(double v) const noexcept { return ((c3 * v + c2) * v + c1) * v + c0; }
  double derivative(double v) const noexcept { return (3.0 * c3 * v + 2.0 * c2) * v + c1; }

  bool increasing() const noexcept { return derivative(0.5 * (v_window.lo + v_window.hi)) > 0.0; }

  /// Angle range covered on v_window, ordered ascending.
  Interval angle_range() const noexcept {
    const double a = (*this)(v_window.lo);
    const double b = (*this)(v_window.hi);
    return {std::min(a, b), std::max(a, b)};
  }
};

inline constexpr int kMonotoneGridPoints = 1024;

/// True when the derivative has one strict sign on a 1,024-point grid over v_window.
inline bool is_monotone(const CubicModel& m) noexcept {
  if (!(m.v_window.hi > m.v_window.lo)) return false;
  int positive = 0;
  int negative = 0;
  for (int i = 0; i < kMonotoneGridPoints; ++i) {
    const double v = m.v_window.lo + m.v_window.width() * i / (kMonotoneGridPoints - 1);
    const double d = m.derivative(v);
    if (d > 0.0) {
      ++positive;
    } else if (d < 0.0) {
      ++negative;
    } else {
      return false;
    }
  }
  return positive == 0 || negative == 0;
}

inline void require_monotone(const CubicModel& m, const std::string& name) {
  if (!is_monotone(m)) {
    throw ConfigError(name + ": cubic model is not strictly monotone on its voltage window");
  }
}

inline constexpr double kInversionTolerance = 1e-9;

/// Voltage V on v_window with model(V) == theta_target, by bisection.
///
/// The model must be monotone on its window. Throws DomainError if the target
/// is outside the model's angle range.
inline double invert_cubic(const CubicModel& m, double theta_target) {
  const Interval range = m.angle_range();
  if (!std::isfinite(theta_target) || theta_target < range.lo || theta_target > range.hi) {
    throw DomainError("invert_cubic: target angle " + std::to_string(theta_target) +
                      " outside model range [" + std::to_string(range.lo) + ", " +
                      std::to_string(range.hi) + "]");
  }
  const double sign = m.increasing() ? 1.0 : -1.0;
  double lo = m.v_window.lo;
  double hi = m.v_window.hi;
  double best = lo;
  double best_residual = std::abs(m(lo) - theta_target);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = m(mid) - theta_target;
    if (std::abs(r) < best_residual) {
      best = mid;
      best_residual = std::abs(r);
    }
    if (best_residual < 0.01 * kInversionTolerance || mid <= lo || mid >= hi) break;
    if (sign * r < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double r_hi = std::abs(m(m.v_window.hi) - theta_target);
  return r_hi < best_residual ? m.v_window.hi : best;
}

}  // namespace paintpot
