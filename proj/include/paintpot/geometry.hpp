#pragma once

#include "paintpot/angles.hpp"

namespace paintpot {

enum class DofKind { wheel, tilt };

inline const char* to_string(DofKind k) noexcept { return k == DofKind::wheel ? "wheel" : "tilt"; }

/// Angular layout of a dual-wiper wheel track.
///
/// Wiper 0 loses contact on gap_w0 (upper half), wiper 1 on gap_w1 (lower
/// half). Each wiper's characterization is made continuous by moving the arc
/// beyond its gap across the seam at +-pi: wiper 0 shifts angles above
/// gap_w0.hi down by 2pi, wiper 1 shifts angles below gap_w1.lo up by 2pi.
struct WheelGeometry {
  Interval gap_w0{2.0 * kPi / 3.0, 5.0 * kPi / 6.0};
  Interval gap_w1{-5.0 * kPi / 6.0, -2.0 * kPi / 3.0};

  const Interval& gap(int wiper) const noexcept { return wiper == 0 ? gap_w0 : gap_w1; }

  bool in_gap(int wiper, double theta) const noexcept { return gap(wiper).contains(theta); }

  /// Reported (shifted) state of `wiper` for joint angle x.
  double shifted(int wiper, double x) const noexcept {
    if (wiper == 0) return x > gap_w0.hi ? x - kTwoPi : x;
    return x < gap_w1.lo ? x + kTwoPi : x;
  }

  /// Shifted-angle interval a contacting wiper can report: the complement of
  /// its gap, expressed in that wiper's continuous chart.
  Interval shifted_span(int wiper) const noexcept {
    if (wiper == 0) return {gap_w0.hi - kTwoPi, gap_w0.lo};
    return {gap_w1.hi, gap_w1.lo + kTwoPi};
  }

  bool valid() const noexcept {
    return gap_w0.lo > 0.0 && gap_w0.hi < kPi && gap_w0.lo < gap_w0.hi &&  //
           gap_w1.lo > -kPi && gap_w1.hi < 0.0 && gap_w1.lo < gap_w1.hi;
  }
};

}  // namespace paintpot
