#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "fixtures.hpp"

using namespace paintpot;
using namespace paintpot::test;

TEST(WheelIdealVoltage, GapMakesWiperUnavailable) {
  const auto spec = wheel_spec();
  EXPECT_FALSE(wheel_ideal_voltage(0.75 * kPi, 0, spec).has_value());
  EXPECT_TRUE(wheel_ideal_voltage(0.75 * kPi, 1, spec).has_value());
  EXPECT_FALSE(wheel_ideal_voltage(2.0 * kPi / 3.0, 0, spec).has_value());  // closed interval
  EXPECT_FALSE(wheel_ideal_voltage(5.0 * kPi / 6.0, 0, spec).has_value());
}

TEST(WheelIdealVoltage, LinearTruthInverts) {
  WheelSensorSpec spec = linear_wheel_spec();
  spec.truth_w0 = {0.0, 0.0, kTwoPi / 1023.0, -kPi, {0.0, 1023.0}};
  const auto v = wheel_ideal_voltage(0.0, 0, spec);
  ASSERT_TRUE(v.has_value());
  EXPECT_NEAR(*v, 511.5, 1e-7);
}

TEST(WheelIdealVoltage, PublishedCubicAtZero) {
  // Bisection oracle over [0, 1023] computed independently.
  const auto v = wheel_ideal_voltage(0.0, 0, wheel_spec());
  ASSERT_TRUE(v.has_value());
  EXPECT_NEAR(*v, 586.910865872062, 1e-6);
  EXPECT_LT(std::abs(wheel_truth_w0()(*v)), 1e-9);
}

TEST(WheelIdealVoltage, ShiftAppliedBeforeInversion) {
  const auto spec = wheel_spec();
  const double x = 0.95 * kPi;
  EXPECT_NEAR(*wheel_ideal_voltage(x, 0, spec), invert_cubic(spec.truth_w0, x - kTwoPi), 1e-12);
  EXPECT_NEAR(*wheel_ideal_voltage(-x, 1, spec), invert_cubic(spec.truth_w1, -x + kTwoPi), 1e-12);
}

TEST(WheelIdealVoltage, DomainErrors) {
  const auto spec = wheel_spec();
  EXPECT_THROW(wheel_ideal_voltage(3.5, 0, spec), DomainError);
  EXPECT_THROW(wheel_ideal_voltage(std::nan(""), 0, spec), DomainError);
  // -pi is accepted as pi
  EXPECT_EQ(*wheel_ideal_voltage(-kPi, 0, spec), *wheel_ideal_voltage(kPi, 0, spec));
}

TEST(WheelSensorSpec, RejectsBadConfiguration) {
  auto spec = wheel_spec();
  spec.adc_max = 1000;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = wheel_spec();
  spec.truth_w0.c3 = -1e-6;  // non-monotone on [0, 1023]
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = wheel_spec();
  spec.geometry.gap_w0 = {-0.5, 0.5};
  EXPECT_THROW(spec.validate(), ConfigError);
  EXPECT_NO_THROW(wheel_spec().validate());
  EXPECT_NO_THROW(tilt_spec().validate());
}

TEST(Quantize, RoundsHalfAwayAndClamps) {
  Rng rng(1);
  EXPECT_EQ(quantize(511.5, 0.0, rng, 1023), 512);
  EXPECT_EQ(quantize(-3.2, 0.0, rng, 1023), 0);
  EXPECT_EQ(quantize(2000.0, 0.0, rng, 1023), 1023);
  EXPECT_EQ(quantize(511.49, 0.0, rng, 1023), 511);
}

TEST(Quantize, NoiseStatistics) {
  // Monte-Carlo: mean and std of 1e5 draws. Rounding adds a uniform
  // component of variance 1/12, i.e. std sqrt(4 + 1/12) = 2.0207 for
  // sigma = 2; the tolerance band below is the one required for the
  // continuous noise and still holds.
  Rng rng(12345);
  constexpr int n = 100000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const int c = quantize(511.5, 2.0, rng, 1023);
    ASSERT_GE(c, 0);
    ASSERT_LE(c, 1023);
    sum += c;
    sum_sq += static_cast<double>(c) * c;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum_sq / n - mean * mean);
  EXPECT_NEAR(mean, 511.5, 0.05);
  EXPECT_NEAR(sd, 2.0, 0.05);
}

TEST(ReadWheel, AvailabilityByRegion) {
  Rng rng(3);
  const auto spec = wheel_spec();
  auto r = read_wheel(0.0, spec, rng);
  EXPECT_TRUE(r[0].available);
  EXPECT_TRUE(r[1].available);
  r = read_wheel(-0.75 * kPi, spec, rng);
  EXPECT_TRUE(r[0].available);
  EXPECT_FALSE(r[1].available);
  r = read_wheel(kPi, spec, rng);
  EXPECT_TRUE(r[0].available);
  EXPECT_TRUE(r[1].available);
  EXPECT_EQ(r[0].wiper_index, 0);
  EXPECT_EQ(r[1].wiper_index, 1);
}

TEST(ReadWheel, AtLeastOneWiperAlwaysAvailable) {
  Rng rng(5);
  const auto spec = wheel_spec();
  constexpr int n = 10000;
  for (int i = 1; i <= n; ++i) {
    const double theta = -kPi + kTwoPi * i / n;
    const auto r = read_wheel(theta, spec, rng);
    ASSERT_TRUE(r[0].available || r[1].available) << theta;
  }
}

TEST(ReadWheel, NoiselessIsDeterministic) {
  const auto spec = wheel_spec(0.0);
  Rng a(1);
  Rng b(999);
  for (double theta : {-3.0, -2.2, -0.3, 1.0, 2.3, 3.1}) {
    const auto ra = read_wheel(theta, spec, a);
    const auto ra2 = read_wheel(theta, spec, a);
    const auto rb = read_wheel(theta, spec, b);
    for (int w = 0; w < 2; ++w) {
      EXPECT_EQ(ra[w].available, rb[w].available);
      if (ra[w].available) {
        EXPECT_EQ(ra[w].count, rb[w].count);
        EXPECT_EQ(ra[w].count, ra2[w].count);
      }
    }
  }
}

TEST(ReadTilt, LinearTruth) {
  TiltSensorSpec spec;
  spec.noise_std = 0.0;
  spec.truth = {0.0, 0.0, kPi / 1023.0, -kPi / 2.0, {0.0, 1023.0}};
  EXPECT_NEAR(tilt_ideal_voltage(0.0, spec), 511.5, 1e-7);
  EXPECT_NEAR(tilt_ideal_voltage(-kPi / 2.0, spec), 0.0, 1e-7);
  Rng rng(1);
  EXPECT_EQ(read_tilt(0.0, spec, rng).count, 512);
}

TEST(ReadTilt, PublishedCubic) {
  const double v = tilt_ideal_voltage(0.5, tilt_spec());
  EXPECT_NEAR(v, 642.335286391508, 1e-6);
  EXPECT_LT(std::abs(tilt_truth()(v) - 0.5), 1e-9);
}

TEST(ReadTilt, OutOfRange) {
  Rng rng(1);
  EXPECT_THROW(read_tilt(1.6, tilt_spec(), rng), DomainError);
}

TEST(PlantStep, Kinematics) {
  Rng rng(1);
  EXPECT_EQ(simulate_plant_step(DofKind::wheel, 0.0, 0.0, 0.1, 0.01, 0.0, rng).theta, 0.0);
  EXPECT_NEAR(simulate_plant_step(DofKind::wheel, 0.0, 1.0, 0.1, 0.01, 0.0, rng).theta, 0.001, 1e-15);
  // modular oracle: (pi - 0.0005 + 0.001) - 2pi
  const double wrapped = simulate_plant_step(DofKind::wheel, kPi - 0.0005, 1.0, 0.1, 0.01, 0.0, rng).theta;
  EXPECT_NEAR(wrapped, -kPi + 0.0005, 1e-12);
  EXPECT_THROW(simulate_plant_step(DofKind::wheel, 0.0, 1.0, 0.1, 0.0, 0.0, rng), ConfigError);
}

TEST(PlantStep, TiltSaturates) {
  Rng rng(1);
  const auto s = simulate_plant_step(DofKind::tilt, 1.57, 10.0, 1.0, 0.01, 0.0, rng);
  EXPECT_TRUE(s.saturated);
  EXPECT_EQ(s.theta, kPi / 2.0);
  const auto n = simulate_plant_step(DofKind::tilt, -1.57, -10.0, 1.0, 0.01, 0.0, rng);
  EXPECT_EQ(n.theta, -kPi / 2.0);
}

TEST(PlantStep, AffineInOmegaWithoutNoise) {
  Rng rng(1);
  const double base = simulate_plant_step(DofKind::tilt, 0.1, 0.0, 0.3, 0.02, 0.0, rng).theta;
  const double one = simulate_plant_step(DofKind::tilt, 0.1, 1.0, 0.3, 0.02, 0.0, rng).theta;
  for (double w : {-5.0, -1.5, 0.25, 2.0, 7.0}) {
    const double got = simulate_plant_step(DofKind::tilt, 0.1, w, 0.3, 0.02, 0.0, rng).theta;
    EXPECT_NEAR(got, base + w * (one - base), 1e-14);
  }
}

TEST(PlantStep, ProcessNoiseScale) {
  Rng rng(8);
  constexpr int n = 20000;
  const double q = 0.5;
  const double dt = 0.1;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = simulate_plant_step(DofKind::tilt, 0.0, 0.0, 1.0, dt, q, rng).theta;
    sum_sq += d * d;
  }
  EXPECT_NEAR(std::sqrt(sum_sq / n), dt * std::sqrt(q), 0.03 * dt * std::sqrt(q));
}
