#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "commands.hpp"
#include "fixtures.hpp"

using namespace paintpot;
using namespace paintpot::test;

TEST(PlanQuintic, NullMotion) {
  const auto q = plan_quintic(0.0, 0.0, 2.0);
  for (double a : q.a) EXPECT_EQ(a, 0.0);
}

TEST(PlanQuintic, UnitRestToRest) {
  // 6x6 boundary system solved by hand: p = 10t^3 - 15t^4 + 6t^5.
  const auto q = plan_quintic(0.0, 1.0, 1.0);
  const double expect[6] = {0.0, 0.0, 0.0, 10.0, -15.0, 6.0};
  for (int i = 0; i < 6; ++i) EXPECT_EQ(q.a[i], expect[i]);
  EXPECT_THROW(plan_quintic(0.0, 1.0, 0.0), ConfigError);
  EXPECT_THROW(plan_quintic(0.0, 1.0, -1.0), ConfigError);
}

TEST(PlanQuintic, MidpointSymmetry) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-4.0, 4.0);
  std::uniform_real_distribution<double> t(0.1, 20.0);
  for (int i = 0; i < 200; ++i) {
    const double x0 = x(rng);
    const double xf = x(rng);
    const double tt = t(rng);
    ASSERT_NEAR(sample(plan_quintic(x0, xf, tt), tt / 2.0).position, 0.5 * (x0 + xf), 1e-12);
  }
}

TEST(Sample, EndpointsAndMidpoint) {
  const auto q = plan_quintic(0.0, 1.0, 1.0);
  auto s = sample(q, 0.0);
  EXPECT_EQ(s.position, 0.0);
  EXPECT_EQ(s.velocity, 0.0);
  s = sample(q, 1.0);
  EXPECT_EQ(s.position, 1.0);
  EXPECT_EQ(s.velocity, 0.0);
  s = sample(q, 0.5);
  EXPECT_NEAR(s.position, 0.5, 1e-15);
  EXPECT_NEAR(s.velocity, 1.875, 1e-14);  // 30t^2 - 60t^3 + 30t^4 at 0.5
  s = sample(q, 7.0);
  EXPECT_EQ(s.position, 1.0);
  EXPECT_EQ(s.velocity, 0.0);
  s = sample(plan_quintic(2.0, -1.0, 4.0), -1.0);
  EXPECT_EQ(s.position, 2.0);
}

TEST(Sample, VelocityMatchesFiniteDifference) {
  const auto q = plan_quintic(-0.7, 2.2, 3.0);
  for (double t = 0.1; t < 2.95; t += 0.1) {
    const double h = 1e-6;
    const double fd = (sample(q, t + h).position - sample(q, t - h).position) / (2.0 * h);
    EXPECT_NEAR(sample(q, t).velocity, fd, 1e-7);
  }
}

TEST(ControlStep, Examples) {
  const TransitionModel tm{0.5, 0.01, 0.05};
  const ControllerGains g{2.0, 10.0};
  EXPECT_EQ(control_step(DofKind::wheel, 0.3, 0.3, 0.0, g, tm), 0.0);
  EXPECT_NEAR(control_step(DofKind::tilt, 0.0, 0.1, 0.0, g, tm), 0.4, 1e-15);
  // Across the seam: ref -0.95pi, est 0.95pi is a +0.1pi correction.
  const double w = control_step(DofKind::wheel, 0.95 * kPi, -0.95 * kPi, 0.0, {1.0, 100.0}, {1.0, 0.01, 0.0});
  EXPECT_NEAR(w, 0.1 * kPi, 1e-12);
  EXPECT_EQ(control_step(DofKind::tilt, 0.0, 5.0, 0.0, g, tm), 10.0);
  EXPECT_EQ(control_step(DofKind::tilt, 0.0, -5.0, 0.0, g, tm), -10.0);
  EXPECT_THROW(control_step(DofKind::tilt, 0.0, 0.0, 0.0, g, {0.0, 0.01, 0.0}), ConfigError);
}

namespace {

ExperimentConfig wheel_config(double noise, double q_true, double x0, double xf, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.kind = DofKind::wheel;
  cfg.wheel_sensor = wheel_spec(noise);
  const auto sweep = cli::generate_sweep(as_sensor(wheel_spec(noise)), 14.0, 50.0, seed + 100);
  cfg.wheel_obs = make_bundle(characterize(sweep), {}).wheel_observation();
  cfg.filter = {0.25, 0.01, 0.05};
  cfg.q_true = q_true;
  cfg.x0 = x0;
  cfg.xf = xf;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(RunExperiment, ZeroNoiseTracksClosely) {
  const auto r = run_experiment(wheel_config(0.0, 0.0, kPi, 0.0, 1));
  EXPECT_EQ(r.rows.size(), 501u);
  EXPECT_LT(r.avg_abs_error, 0.01);
}

TEST(RunExperiment, SeedDeterminism) {
  const auto cfg = wheel_config(1.0, 0.05, -kPi, 0.0, 17);
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    ASSERT_EQ(a.rows[i].theta_true, b.rows[i].theta_true);
    ASSERT_EQ(a.rows[i].theta_est, b.rows[i].theta_est);
    ASSERT_EQ(a.rows[i].u_cmd, b.rows[i].u_cmd);
  }
  EXPECT_EQ(a.avg_abs_error, b.avg_abs_error);
}

TEST(RunExperiment, WiperOneGapDuringNegativeStart) {
  const auto r = run_experiment(wheel_config(1.0, 0.05, -kPi, 0.0, 4));
  std::size_t missing = 0;
  for (const auto& row : r.rows) missing += row.feature[1] ? 0 : 1;
  EXPECT_GT(missing, 20u);
  EXPECT_LT(max_estimate_jump(r), 0.05);
}

TEST(RunExperiment, ConfigMismatch) {
  auto cfg = wheel_config(1.0, 0.05, kPi, 0.0, 1);
  cfg.kind = DofKind::tilt;
  EXPECT_THROW(run_experiment(cfg), ConfigError);
  cfg = wheel_config(1.0, 0.05, kPi, 0.0, 1);
  cfg.wheel_obs.reset();
  EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(RunExperiment, TiltTracks) {
  ExperimentConfig cfg;
  cfg.kind = DofKind::tilt;
  cfg.tilt_sensor = tilt_spec(1.0);
  const auto sweep = cli::generate_sweep(as_sensor(tilt_spec(1.0)), 14.0, 50.0, 5);
  cfg.tilt_obs = make_bundle(characterize(sweep), {}).tilt_observation();
  cfg.filter = {0.25, 0.01, 0.05};
  cfg.x0 = -1.3;
  cfg.xf = 1.3;
  cfg.seed = 5;
  const auto r = run_experiment(cfg);
  EXPECT_LT(r.avg_abs_error, 0.04);
  EXPECT_FALSE(r.rows.back().feature[1]);
}
