#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "paintpot/angles.hpp"
#include "paintpot/characterize.hpp"
#include "paintpot/cubic.hpp"
#include "paintpot/error.hpp"
#include "paintpot/geometry.hpp"
#include "paintpot/sensor_sim.hpp"

namespace paintpot {

/// Scalar kinematic transition x_t = x_{t-1} + G u + U n, with G = k dt and U = dt.
struct TransitionModel {
  double k = 1.0;   ///< joint rad per motor rad
  double dt = 0.01; ///< s
  double q = 0.05;  ///< process noise power, rad^2/s^2

  double g() const noexcept { return k * dt; }
  double u_gain() const noexcept { return dt; }

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("transition model: dt must be > 0");
    if (!(q >= 0.0)) throw ConfigError("transition model: q must be >= 0");
    if (!std::isfinite(k)) throw ConfigError("transition model: k must be finite");
  }
};

struct GaussianBelief {
  double mu = 0.0;
  double sigma = 1e-4;  ///< variance, rad^2
};

inline constexpr double kDefaultSigma0 = 1e-4;
inline constexpr double kDefaultQ = 0.05;

struct WheelObservationModel {
  CubicModel m0;
  CubicModel m1;
  double r0 = 1e-4;
  double r1 = 1e-4;
  std::array<ValidRange, 2> ranges{};
  WheelGeometry geometry;

  const CubicModel& model(int i) const noexcept { return i == 0 ? m0 : m1; }
  double r(int i) const noexcept { return i == 0 ? r0 : r1; }

  void validate() const {
    if (!(r0 > 0.0) || !(r1 > 0.0)) throw ConfigError("wheel observation model: r0, r1 must be > 0");
  }
};

struct TiltObservationModel {
  CubicModel m;
  double r = 1e-4;

  void validate() const {
    if (!(r > 0.0)) throw ConfigError("tilt observation model: r must be > 0");
  }
};

/// A converted measurement z = f_i(V_i) from wiper i.
struct Feature {
  int index = 0;
  double z = 0.0;
  double r = 0.0;
};

/// Measurement variance for a fitted wiper: squared fit RMS, floored at the
/// squared angle change of one ADC count at the model's steepest point.
inline double default_measurement_variance(const CubicModel& m, double fit_rms) {
  double steepest = 0.0;
  for (int i = 0; i < kMonotoneGridPoints; ++i) {
    const double v = m.v_window.lo + m.v_window.width() * i / (kMonotoneGridPoints - 1);
    steepest = std::max(steepest, std::abs(m.derivative(v)));
  }
  return std::max(fit_rms * fit_rms, steepest * steepest);
}

inline GaussianBelief wrap_wheel_belief(GaussianBelief b) noexcept {
  b.mu = wrap_angle(b.mu);
  return b;
}

/// Initial wheel belief from whichever wiper is inside its valid range, wiper 0 first.
inline GaussianBelief init_wheel(const std::array<AdcReading, 2>& readings, const WheelObservationModel& obs,
                                 double sigma0 = kDefaultSigma0) {
  if (!(sigma0 > 0.0)) throw ConfigError("init_wheel: sigma0 must be > 0");
  double mu = 0.0;
  if (readings[0].available && obs.ranges[0].admits(readings[0].count)) {
    mu = obs.m0(readings[0].count);
    if (mu < -kPi) mu += kTwoPi;
  } else if (readings[1].available && obs.ranges[1].admits(readings[1].count)) {
    mu = obs.m1(readings[1].count);
    if (mu > kPi) mu -= kTwoPi;
  } else {
    throw InitError("init_wheel: neither wiper reading lies inside its valid range");
  }
  return {wrap_angle(mu), sigma0};
}

inline GaussianBelief init_tilt(const AdcReading& reading, const TiltObservationModel& obs,
                                double sigma0 = kDefaultSigma0) {
  if (!(sigma0 > 0.0)) throw ConfigError("init_tilt: sigma0 must be > 0");
  if (!reading.available || !obs.m.v_window.contains(reading.count)) {
    throw InitError("init_tilt: count " + std::to_string(reading.count) + " outside the model's voltage window");
  }
  return {obs.m(reading.count), sigma0};
}

/// Prediction: mean += G u, variance += U^2 Q. No wrapping.
inline GaussianBelief predict(const GaussianBelief& b, double u, const TransitionModel& tm) noexcept {
  const double ug = tm.u_gain();
  return {b.mu + tm.g() * u, b.sigma + ug * ug * tm.q};
}

/// Converted measurements from every wiper that is in contact and strictly inside its valid range.
inline std::vector<Feature> extract_features(const std::array<AdcReading, 2>& readings,
                                             const WheelObservationModel& obs) {
  std::vector<Feature> out;
  out.reserve(2);
  for (int i = 0; i < 2; ++i) {
    const AdcReading& rd = readings[i];
    if (!rd.available || !obs.ranges[i].admits(rd.count)) continue;
    out.push_back({i, obs.model(i)(rd.count), obs.r(i)});
  }
  return out;
}

/// Predicted measurement of feature `index`: the state moved into that wiper's shifted chart.
inline double predicted_feature_measurement(double mu_bar, int index, const WheelGeometry& geometry = {}) noexcept {
  return geometry.shifted(index, mu_bar);
}

/// Wheel measurement update over 0, 1 or 2 features, followed by wrapping into (-pi, pi].
///
/// Innovations are reduced into (-pi, pi]. When the predicted mean and the
/// true angle straddle a shift boundary the two charts disagree by exactly
/// 2pi, and the reduced innovation is the physical one.
inline GaussianBelief update_wheel(const GaussianBelief& prior, const std::vector<Feature>& features,
                                   const WheelGeometry& geometry = {}) {
  if (features.size() > 2) throw ConfigError("update_wheel: at most two features");
  const double s_bar = prior.sigma;
  const auto innovation = [&](const Feature& f) {
    return wrap_angle(f.z - predicted_feature_measurement(prior.mu, f.index, geometry));
  };
  GaussianBelief post = prior;
  if (features.size() == 1) {
    const Feature& f = features[0];
    const double s = s_bar + f.r;
    if (!(s > 0.0)) throw NumericError("update_wheel: non-positive innovation covariance");
    const double gain = s_bar / s;
    post.mu = prior.mu + gain * innovation(f);
    post.sigma = s_bar * (f.r / s);  // (1 - K) S_bar without cancellation
  } else if (features.size() == 2) {
    const Feature& a = features[0];
    const Feature& b = features[1];
    // S = C S_bar C^T + diag(ra, rb), C = [1, 1]^T; K = S_bar C^T S^-1 = S_bar [rb, ra] / det(S).
    const double det = s_bar * (a.r + b.r) + a.r * b.r;
    if (!(det > 0.0) || !(s_bar + a.r > 0.0)) throw NumericError("update_wheel: non-positive innovation covariance");
    const double ka = s_bar * b.r / det;
    const double kb = s_bar * a.r / det;
    post.mu = prior.mu + ka * innovation(a) + kb * innovation(b);
    post.sigma = s_bar * (a.r * b.r / det);  // (1 - K C) S_bar
  }
  return wrap_wheel_belief(post);
}

struct TiltUpdate {
  GaussianBelief belief;
  bool rejected = false;
};

/// Tilt measurement update. Counts outside the model window are rejected and
/// the prior is returned unchanged.
inline TiltUpdate update_tilt(const GaussianBelief& prior, const AdcReading& reading,
                              const TiltObservationModel& obs) {
  if (!reading.available || !obs.m.v_window.contains(reading.count)) return {prior, true};
  const double s = prior.sigma + obs.r;
  if (!(s > 0.0)) throw NumericError("update_tilt: non-positive innovation covariance");
  const double gain = prior.sigma / s;
  const double z = obs.m(reading.count);
  return {{prior.mu + gain * (z - prior.mu), prior.sigma * (obs.r / s)}, false};
}

/// Per-step output of a filter.
struct FilterStep {
  GaussianBelief belief;
  std::array<bool, 2> feature_used{false, false};
};

/// Dual-wiper wheel estimator state machine. Initializes from the first reading.
class WheelFilter {
 public:
  WheelFilter(WheelObservationModel obs, TransitionModel tm, double sigma0 = kDefaultSigma0)
      : obs_(std::move(obs)), tm_(tm), sigma0_(sigma0) {
    obs_.validate();
    tm_.validate();
  }

  FilterStep initialize(const std::array<AdcReading, 2>& readings) {
    belief_ = init_wheel(readings, obs_, sigma0_);
    initialized_ = true;
    FilterStep out{belief_, {}};
    for (int i = 0; i < 2; ++i) out.feature_used[i] = readings[i].available && obs_.ranges[i].admits(readings[i].count);
    return out;
  }

  /// predict with motor speed u, then update with the readings taken after the move.
  FilterStep step(double u, const std::array<AdcReading, 2>& readings) {
    if (!initialized_) return initialize(readings);
    const auto features = extract_features(readings, obs_);
    belief_ = update_wheel(predict(belief_, u, tm_), features, obs_.geometry);
    FilterStep out{belief_, {}};
    for (const auto& f : features) out.feature_used[f.index] = true;
    return out;
  }

  bool initialized() const noexcept { return initialized_; }
  const GaussianBelief& belief() const noexcept { return belief_; }

 private:
  WheelObservationModel obs_;
  TransitionModel tm_;
  double sigma0_;
  GaussianBelief belief_;
  bool initialized_ = false;
};

class TiltFilter {
 public:
  TiltFilter(TiltObservationModel obs, TransitionModel tm, double sigma0 = kDefaultSigma0)
      : obs_(std::move(obs)), tm_(tm), sigma0_(sigma0) {
    obs_.validate();
    tm_.validate();
  }

  FilterStep initialize(const AdcReading& reading) {
    belief_ = init_tilt(reading, obs_, sigma0_);
    initialized_ = true;
    return {belief_, {true, false}};
  }

  FilterStep step(double u, const AdcReading& reading) {
    if (!initialized_) return initialize(reading);
    const auto upd = update_tilt(predict(belief_, u, tm_), reading, obs_);
    belief_ = upd.belief;
    return {belief_, {!upd.rejected, false}};
  }

  bool initialized() const noexcept { return initialized_; }
  const GaussianBelief& belief() const noexcept { return belief_; }

 private:
  TiltObservationModel obs_;
  TransitionModel tm_;
  double sigma0_;
  GaussianBelief belief_;
  bool initialized_ = false;
};

}  // namespace paintpot
