#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "paintpot/angles.hpp"
#include "paintpot/error.hpp"
#include "paintpot/estimate.hpp"
#include "paintpot/geometry.hpp"
#include "paintpot/sensor_sim.hpp"

namespace paintpot {

/// Rest-to-rest quintic p(t) = sum a_i (t / t_total)^i.
struct QuinticTrajectory {
  std::array<double, 6> a{};
  double t_total = 1.0;
  double x0 = 0.0;
  double xf = 0.0;
};

struct TrajectorySample {
  double position = 0.0;
  double velocity = 0.0;
};

/// Zero velocity and acceleration at both ends: a3, a4, a5 = 10, -15, 6 times the displacement.
inline QuinticTrajectory plan_quintic(double x0, double xf, double t_total) {
  if (!(t_total > 0.0)) throw ConfigError("plan_quintic: t_total must be > 0");
  const double d = xf - x0;
  return {{x0, 0.0, 0.0, 10.0 * d, -15.0 * d, 6.0 * d}, t_total, x0, xf};
}

/// Position and velocity at time t; t is clamped to [0, t_total].
inline TrajectorySample sample(const QuinticTrajectory& traj, double t) noexcept {
  if (t <= 0.0) return {traj.x0, 0.0};
  if (t >= traj.t_total) return {traj.xf, 0.0};
  const auto& a = traj.a;
  const double s = t / traj.t_total;
  const double pos = a[0] + s * (a[1] + s * (a[2] + s * (a[3] + s * (a[4] + s * a[5]))));
  const double dpos = a[1] + s * (2.0 * a[2] + s * (3.0 * a[3] + s * (4.0 * a[4] + s * 5.0 * a[5])));
  return {pos, dpos / traj.t_total};
}

/// Unclamped polynomial derivatives, order 0..2, for boundary checks.
inline double evaluate_derivative(const QuinticTrajectory& traj, double t, int order) noexcept {
  const double s = t / traj.t_total;
  double acc = 0.0;
  for (int i = 5; i >= order; --i) {
    double coeff = traj.a[i];
    for (int j = 0; j < order; ++j) coeff *= (i - j);
    acc = acc * s + coeff;
  }
  return acc / std::pow(traj.t_total, order);
}

struct ControllerGains {
  double kp = 4.0;
  double omega_max = 10.0;  ///< rad/s
};

/// Velocity feedforward plus proportional correction, mapped to motor speed through k.
inline double control_step(DofKind kind, double est_mu, double ref_pos, double ref_vel, const ControllerGains& gains,
                           const TransitionModel& tm) {
  if (tm.k == 0.0) throw ConfigError("control_step: transmission ratio k must be non-zero");
  const double err = kind == DofKind::wheel ? angle_diff(ref_pos, est_mu) : ref_pos - est_mu;
  const double omega = (ref_vel + gains.kp * err) / tm.k;
  return std::clamp(omega, -gains.omega_max, gains.omega_max);
}

struct ExperimentConfig {
  DofKind kind = DofKind::wheel;
  std::optional<WheelSensorSpec> wheel_sensor;
  std::optional<TiltSensorSpec> tilt_sensor;
  std::optional<WheelObservationModel> wheel_obs;
  std::optional<TiltObservationModel> tilt_obs;
  TransitionModel filter;   ///< k, dt shared with the plant; q used by the filter
  double q_true = 0.05;     ///< plant process noise power
  double sigma0 = kDefaultSigma0;
  ControllerGains gains;
  double x0 = 0.0;
  double xf = 0.0;
  double t_total = 5.0;
  std::uint64_t seed = 0;

  void validate() const {
    filter.validate();
    if (!(q_true >= 0.0)) throw ConfigError("experiment: q_true must be >= 0");
    if (kind == DofKind::wheel) {
      if (!wheel_sensor || !wheel_obs || tilt_sensor || tilt_obs) {
        throw ConfigError("experiment: wheel DOF needs a wheel sensor and a wheel observation model only");
      }
    } else if (!tilt_sensor || !tilt_obs || wheel_sensor || wheel_obs) {
      throw ConfigError("experiment: tilt DOF needs a tilt sensor and a tilt observation model only");
    }
  }
};

struct ExperimentRow {
  double t = 0.0;
  double theta_true = 0.0;
  double theta_est = 0.0;
  double theta_ref = 0.0;
  double u_cmd = 0.0;
  std::array<bool, 2> feature{false, false};
  std::array<AdcReading, 2> readings{};
};

struct ExperimentResult {
  DofKind kind = DofKind::wheel;
  std::vector<ExperimentRow> rows;
  double avg_abs_error = 0.0;
  double max_abs_error = 0.0;
};

namespace detail {

inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

}  // namespace detail

/// Closed-loop run along a quintic reference. Per step: reference, control,
/// plant, sensor, predict, update, log. Deterministic in cfg.seed.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const bool wheel = cfg.kind == DofKind::wheel;
  if (wheel) {
    cfg.wheel_sensor->validate();
  } else {
    cfg.tilt_sensor->validate();
  }
  const auto traj = plan_quintic(cfg.x0, cfg.xf, cfg.t_total);
  const double dt = cfg.filter.dt;
  const auto steps = static_cast<long>(std::llround(cfg.t_total / dt));

  Rng sensor_rng = detail::make_stream(cfg.seed, 1);
  Rng plant_rng = detail::make_stream(cfg.seed, 2);
  std::optional<WheelFilter> wheel_filter;
  std::optional<TiltFilter> tilt_filter;
  if (wheel) {
    wheel_filter.emplace(*cfg.wheel_obs, cfg.filter, cfg.sigma0);
  } else {
    tilt_filter.emplace(*cfg.tilt_obs, cfg.filter, cfg.sigma0);
  }

  const auto read = [&](double theta) {
    if (wheel) return read_wheel(theta, *cfg.wheel_sensor, sensor_rng);
    return std::array<AdcReading, 2>{read_tilt(theta, *cfg.tilt_sensor, sensor_rng), AdcReading{1, 0, false}};
  };
  const auto filter_step = [&](double u, const std::array<AdcReading, 2>& rd) {
    return wheel ? wheel_filter->step(u, rd) : tilt_filter->step(u, rd[0]);
  };
  const auto error = [&](double est, double ref) {
    return std::abs(wheel ? angle_diff(est, ref) : est - ref);
  };

  ExperimentResult result;
  result.kind = cfg.kind;
  result.rows.reserve(static_cast<std::size_t>(steps) + 1);

  double theta = wheel ? canonical_wheel_angle(wrap_angle(cfg.x0)) : cfg.x0;
  auto readings = read(theta);
  auto est = filter_step(0.0, readings);
  result.rows.push_back(
      {0.0, theta, est.belief.mu, wheel ? wrap_angle(cfg.x0) : cfg.x0, 0.0, est.feature_used, readings});

  for (long i = 1; i <= steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    const auto ref = sample(traj, t);
    const double u = control_step(cfg.kind, est.belief.mu, ref.position, ref.velocity, cfg.gains, cfg.filter);
    theta = simulate_plant_step(cfg.kind, theta, u, cfg.filter.k, dt, cfg.q_true, plant_rng).theta;
    readings = read(theta);
    est = filter_step(u, readings);
    result.rows.push_back({t, theta, est.belief.mu, wheel ? wrap_angle(ref.position) : ref.position, u,
                           est.feature_used, readings});
  }

  double sum = 0.0;
  for (const auto& r : result.rows) {
    const double e = error(r.theta_est, r.theta_ref);
    sum += e;
    result.max_abs_error = std::max(result.max_abs_error, e);
  }
  result.avg_abs_error = sum / static_cast<double>(result.rows.size());
  return result;
}

/// Largest change of the estimate between consecutive rows (wrapped for wheel DOFs).
inline double max_estimate_jump(const ExperimentResult& r) {
  double jump = 0.0;
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const double d = r.rows[i].theta_est - r.rows[i - 1].theta_est;
    jump = std::max(jump, std::abs(r.kind == DofKind::wheel ? wrap_angle(d) : d));
  }
  return jump;
}

}  // namespace paintpot
