#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "paintpot/angles.hpp"
#include "paintpot/cubic.hpp"
#include "paintpot/error.hpp"
#include "paintpot/geometry.hpp"

namespace paintpot {

using Rng = std::mt19937_64;

inline bool is_full_bit_depth(int adc_max) noexcept {
  return adc_max >= 1 && std::has_single_bit(static_cast<unsigned>(adc_max) + 1u);
}

/// Ground-truth description of a dual-wiper wheel potentiometer.
/// truth_w0 / truth_w1 map a wiper voltage to its shifted angle.
struct WheelSensorSpec {
  WheelGeometry geometry;
  int adc_max = 1023;
  double noise_std = 1.0;
  CubicModel truth_w0;
  CubicModel truth_w1;

  const CubicModel& truth(int wiper) const noexcept { return wiper == 0 ? truth_w0 : truth_w1; }

  void validate() const {
    if (!geometry.valid()) throw ConfigError("wheel spec: gap intervals must lie in (0, pi) and (-pi, 0)");
    if (!is_full_bit_depth(adc_max)) throw ConfigError("wheel spec: adc_max must be 2^b - 1");
    if (!(noise_std >= 0.0)) throw ConfigError("wheel spec: noise_std must be >= 0");
    for (int w = 0; w < 2; ++w) {
      const std::string name = "wheel spec truth_w" + std::to_string(w);
      require_monotone(truth(w), name);
      const Interval need = geometry.shifted_span(w);
      const Interval have = truth(w).angle_range();
      if (need.lo < have.lo || need.hi > have.hi) {
        throw ConfigError(name + ": model range does not cover the wiper's shifted angle span");
      }
    }
  }
};

/// Ground-truth description of a single-wiper tilt potentiometer.
struct TiltSensorSpec {
  Interval angle_range{-kPi / 2.0, kPi / 2.0};
  int adc_max = 1023;
  double noise_std = 1.0;
  CubicModel truth;

  void validate() const {
    if (!(angle_range.hi > 0.0) || std::abs(angle_range.lo + angle_range.hi) > 1e-12) {
      throw ConfigError("tilt spec: angle_range must be symmetric about 0");
    }
    if (!is_full_bit_depth(adc_max)) throw ConfigError("tilt spec: adc_max must be 2^b - 1");
    if (!(noise_std >= 0.0)) throw ConfigError("tilt spec: noise_std must be >= 0");
    require_monotone(truth, "tilt spec truth");
    const Interval have = truth.angle_range();
    if (angle_range.lo < have.lo || angle_range.hi > have.hi) {
      throw ConfigError("tilt spec truth: model range does not cover angle_range");
    }
  }
};

/// One quantized wiper sample. `count` must be ignored when !available.
struct AdcReading {
  int wiper_index = 0;
  int count = 0;
  bool available = true;
};

/// Maps -pi onto pi; throws for anything outside [-pi, pi].
inline double canonical_wheel_angle(double theta) {
  if (!std::isfinite(theta) || theta < -kPi || theta > kPi) {
    throw DomainError("wheel angle " + std::to_string(theta) + " outside (-pi, pi]");
  }
  return theta == -kPi ? kPi : theta;
}

/// Noiseless voltage a wheel wiper produces at joint angle theta, or nullopt in its gap.
inline std::optional<double> wheel_ideal_voltage(double theta, int wiper, const WheelSensorSpec& spec) {
  theta = canonical_wheel_angle(theta);
  if (spec.geometry.in_gap(wiper, theta)) return std::nullopt;
  return invert_cubic(spec.truth(wiper), spec.geometry.shifted(wiper, theta));
}

/// Noiseless tilt voltage at theta.
inline double tilt_ideal_voltage(double theta, const TiltSensorSpec& spec) {
  if (!std::isfinite(theta) || !spec.angle_range.contains(theta)) {
    throw DomainError("tilt angle " + std::to_string(theta) + " outside [" +
                      std::to_string(spec.angle_range.lo) + ", " + std::to_string(spec.angle_range.hi) + "]");
  }
  return invert_cubic(spec.truth, theta);
}

/// ADC conversion: additive Gaussian count noise, round half away from zero, clamp.
template <class Gen>
int quantize(double voltage, double noise_std, Gen& rng, int adc_max) {
  double v = voltage;
  if (noise_std > 0.0) v += std::normal_distribution<double>(0.0, noise_std)(rng);
  const double r = std::round(v);
  if (!(r > 0.0)) return 0;  // also catches NaN
  if (r >= adc_max) return adc_max;
  return static_cast<int>(r);
}

template <class Gen>
std::array<AdcReading, 2> read_wheel(double theta, const WheelSensorSpec& spec, Gen& rng) {
  std::array<AdcReading, 2> out;
  for (int w = 0; w < 2; ++w) {
    out[w].wiper_index = w;
    if (const auto v = wheel_ideal_voltage(theta, w, spec)) {
      out[w].count = quantize(*v, spec.noise_std, rng, spec.adc_max);
      out[w].available = true;
    } else {
      out[w].count = 0;
      out[w].available = false;
    }
  }
  return out;
}

template <class Gen>
AdcReading read_tilt(double theta, const TiltSensorSpec& spec, Gen& rng) {
  return {0, quantize(tilt_ideal_voltage(theta, spec), spec.noise_std, rng, spec.adc_max), true};
}

struct PlantState {
  double theta = 0.0;
  bool saturated = false;
};

/// One Euler step of theta' = k*omega + n with n ~ N(0, q_true).
/// Wheel angles wrap into (-pi, pi]; tilt angles clamp at +-pi/2 and flag saturation.
template <class Gen>
PlantState simulate_plant_step(DofKind kind, double theta, double omega, double k, double dt,
                               double q_true, Gen& rng) {
  if (!(dt > 0.0)) throw ConfigError("simulate_plant_step: dt must be > 0");
  double next = theta + k * omega * dt;
  if (q_true > 0.0) next += std::normal_distribution<double>(0.0, std::sqrt(q_true))(rng) * dt;
  if (kind == DofKind::wheel) return {wrap_angle(next), false};
  constexpr double stop = kPi / 2.0;
  if (next > stop) return {stop, true};
  if (next < -stop) return {-stop, true};
  return {next, false};
}

/// Wheel sensor with its own random source.
class WheelSensorSim {
 public:
  WheelSensorSim(WheelSensorSpec spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(seed) {
    spec_.validate();
  }
  std::array<AdcReading, 2> read(double theta) { return read_wheel(theta, spec_, rng_); }
  const WheelSensorSpec& spec() const noexcept { return spec_; }

 private:
  WheelSensorSpec spec_;
  Rng rng_;
};

class TiltSensorSim {
 public:
  TiltSensorSim(TiltSensorSpec spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(seed) {
    spec_.validate();
  }
  AdcReading read(double theta) { return read_tilt(theta, spec_, rng_); }
  const TiltSensorSpec& spec() const noexcept { return spec_; }

 private:
  TiltSensorSpec spec_;
  Rng rng_;
};

}  // namespace paintpot
