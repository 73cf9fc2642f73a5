#pragma once

// Sensor models shared by the test suites: the published wheel (wiper 0/1)
// and tilt characterizations, plus simple linear models with closed-form inverses.

#include <cmath>

#include "paintpot/paintpot.hpp"

namespace paintpot::test {

inline CubicModel wheel_truth_w0() { return {5.0281e-9, -1.2255e-5, 1.7856e-2, -7.2750, {0.0, 1023.0}}; }
inline CubicModel wheel_truth_w1() { return {5.1596e-9, -1.2409e-5, 1.7927e-2, -5.8128, {0.0, 1023.0}}; }
inline CubicModel tilt_truth() { return {4.7517e-9, -8.7608e-6, 8.6756e-3, -2.7173, {0.0, 1023.0}}; }

inline WheelSensorSpec wheel_spec(double noise_std = 1.0) {
  WheelSensorSpec s;
  s.noise_std = noise_std;
  s.truth_w0 = wheel_truth_w0();
  s.truth_w1 = wheel_truth_w1();
  return s;
}

inline TiltSensorSpec tilt_spec(double noise_std = 1.0) {
  TiltSensorSpec s;
  s.noise_std = noise_std;
  s.truth = tilt_truth();
  return s;
}

/// Linear wheel truth: wiper 0 maps [0, 1023] onto [-7pi/6, 5pi/6]; wiper 1 onto [-5pi/6, 7pi/6].
inline WheelSensorSpec linear_wheel_spec(double noise_std = 0.0) {
  WheelSensorSpec s;
  s.noise_std = noise_std;
  s.truth_w0 = {0.0, 0.0, kTwoPi / 1023.0, -7.0 * kPi / 6.0, {0.0, 1023.0}};
  s.truth_w1 = {0.0, 0.0, kTwoPi / 1023.0, -5.0 * kPi / 6.0, {0.0, 1023.0}};
  return s;
}

inline SensorSpec as_sensor(const WheelSensorSpec& w) {
  SensorSpec s;
  s.kind = DofKind::wheel;
  s.wheel = w;
  return s;
}

inline SensorSpec as_sensor(const TiltSensorSpec& t) {
  SensorSpec s;
  s.kind = DofKind::tilt;
  s.tilt = t;
  return s;
}

/// Independent bisection on an increasing function over [lo, hi].
template <class F>
double bisect_increasing(F f, double target, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace paintpot::test
