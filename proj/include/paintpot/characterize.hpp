#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "paintpot/angles.hpp"
#include "paintpot/cubic.hpp"
#include "paintpot/error.hpp"
#include "paintpot/geometry.hpp"

namespace paintpot {

struct CalibrationSample {
  double t = 0.0;
  double theta = 0.0;
  int v0 = 0;
  std::optional<int> v1;
};

struct CalibrationDataset {
  DofKind sensor_kind = DofKind::wheel;
  std::vector<CalibrationSample> samples;
  int adc_max = 1023;
};

/// (shifted angle, voltage count) pair used for fitting.
struct AnglePair {
  double theta = 0.0;
  double v = 0.0;
};

/// Open ADC interval (v_min, v_max) in which a wiper count is accepted.
struct ValidRange {
  int v_min = 0;
  int v_max = 0;

  bool admits(int count) const noexcept { return v_min < count && count < v_max; }
};

struct WiperFitStats {
  std::size_t samples = 0;
  double rms = 0.0;
  double max_abs = 0.0;
};

struct FitReport {
  std::vector<WiperFitStats> wipers;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_real(std::string_view field, const char* name, long row) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw ParseError(std::string("bad ") + name + " value '" + std::string(field) + "'", row);
  }
  return value;
}

inline int parse_count(std::string_view field, const char* name, int adc_max, long row) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(std::string("bad ") + name + " count '" + std::string(field) + "'", row);
  }
  if (value < 0 || value > adc_max) {
    throw ParseError(std::string(name) + " = " + std::to_string(value) + " outside [0, " +
                         std::to_string(adc_max) + "]",
                     row);
  }
  return static_cast<int>(value);
}

}  // namespace detail

/// Reads a calibration log with header `t,theta,v0[,v1]`.
///
/// Wheel logs must carry v1. Rows are validated as they are read and the
/// first violation is reported with its 1-based line number (header = 1).
inline CalibrationDataset ingest_log(std::istream& in, DofKind kind, int adc_max = 1023) {
  std::string line;
  long row = 1;
  if (!std::getline(in, line)) throw ParseError("empty calibration log", row);
  const auto header = detail::split_csv(detail::trim(line));
  const bool has_v1 = header.size() == 4 && header[3] == "v1";
  if (header.size() < 3 || header.size() > 4 || header[0] != "t" || header[1] != "theta" ||
      header[2] != "v0" || (header.size() == 4 && !has_v1)) {
    throw ParseError("expected header t,theta,v0[,v1]", row);
  }
  if (kind == DofKind::wheel && !has_v1) throw ParseError("wheel log requires a v1 column", row);

  const Interval angle_range =
      kind == DofKind::wheel ? Interval{-kPi, kPi} : Interval{-kPi / 2.0, kPi / 2.0};

  CalibrationDataset ds;
  ds.sensor_kind = kind;
  ds.adc_max = adc_max;
  while (std::getline(in, line)) {
    ++row;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto fields = detail::split_csv(text);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       row);
    }
    CalibrationSample s;
    s.t = detail::parse_real(fields[0], "t", row);
    s.theta = detail::parse_real(fields[1], "theta", row);
    if (!angle_range.contains(s.theta)) throw ParseError("theta outside the sensor's angle range", row);
    if (kind == DofKind::wheel && s.theta == -kPi) s.theta = kPi;
    s.v0 = detail::parse_count(fields[2], "v0", adc_max, row);
    if (has_v1 && kind == DofKind::wheel) s.v1 = detail::parse_count(fields[3], "v1", adc_max, row);
    if (!ds.samples.empty() && s.t < ds.samples.back().t) throw ParseError("timestamps decrease", row);
    ds.samples.push_back(s);
  }
  if (ds.samples.empty()) throw ParseError("calibration log has no samples", row);
  return ds;
}

/// Per-wiper fitting pairs. Wheel: drops each wiper's gap and moves the arc
/// past the gap across the seam so the angle is continuous in voltage.
/// Tilt: a single list, angles unchanged.
inline std::vector<std::vector<AnglePair>> trim_and_shift(const CalibrationDataset& ds,
                                                          const WheelGeometry& geometry = {}) {
  if (ds.sensor_kind == DofKind::tilt) {
    std::vector<AnglePair> pairs;
    pairs.reserve(ds.samples.size());
    for (const auto& s : ds.samples) pairs.push_back({s.theta, static_cast<double>(s.v0)});
    if (pairs.empty()) throw FitError("insufficient coverage: no tilt samples");
    return {std::move(pairs)};
  }
  std::vector<std::vector<AnglePair>> out(2);
  for (const auto& s : ds.samples) {
    if (!geometry.in_gap(0, s.theta)) out[0].push_back({geometry.shifted(0, s.theta), static_cast<double>(s.v0)});
    if (s.v1 && !geometry.in_gap(1, s.theta)) {
      out[1].push_back({geometry.shifted(1, s.theta), static_cast<double>(*s.v1)});
    }
  }
  for (int w = 0; w < 2; ++w) {
    if (out[w].empty()) throw FitError("insufficient coverage: no usable samples for wiper " + std::to_string(w));
  }
  return out;
}

inline constexpr std::size_t kMinFitSamples = 8;
inline constexpr double kMinFitSpanFraction = 0.5;

/// Ordinary least-squares cubic angle(V).
///
/// Voltages are mapped affinely onto [-1, 1] and the system is solved by
/// column-pivoted Householder QR; the coefficients are then expanded back to
/// raw counts. v_window is the hull of the input voltages. The hull must cover
/// at least half of [0, adc_max].
inline CubicModel fit_cubic(const std::vector<AnglePair>& pairs, int adc_max = 1023) {
  if (pairs.size() < kMinFitSamples) {
    throw FitError("fit_cubic: need at least " + std::to_string(kMinFitSamples) + " samples, got " +
                   std::to_string(pairs.size()));
  }
  double lo = pairs.front().v;
  double hi = pairs.front().v;
  std::set<double> distinct;
  for (const auto& p : pairs) {
    lo = std::min(lo, p.v);
    hi = std::max(hi, p.v);
    if (distinct.size() < 4) distinct.insert(p.v);
  }
  if (distinct.size() < 4) throw FitError("fit_cubic: rank-deficient design (fewer than 4 distinct voltages)");
  if (hi - lo < kMinFitSpanFraction * adc_max) {
    throw FitError("fit_cubic: voltage span " + std::to_string(hi - lo) + " covers less than half of the ADC range");
  }

  const double scale = 2.0 / (hi - lo);
  const double offset = -(hi + lo) / (hi - lo);
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd design(n, 4);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = scale * pairs[i].v + offset;
    design(i, 0) = 1.0;
    design(i, 1) = s;
    design(i, 2) = s * s;
    design(i, 3) = s * s * s;
    rhs(i) = pairs[i].theta;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 4) throw FitError("fit_cubic: rank-deficient design");
  const Eigen::Vector4d d = qr.solve(rhs);

  // p(V) = sum_j d_j (scale V + offset)^j, expanded binomially.
  constexpr double binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  std::array<double, 4> c{};
  for (int k = 0; k < 4; ++k) {
    for (int j = k; j < 4; ++j) c[k] += d(j) * binom[j][k] * std::pow(scale, k) * std::pow(offset, j - k);
  }
  CubicModel m{c[3], c[2], c[1], c[0], {lo, hi}};
  if (!is_monotone(m)) throw FitError("fit_cubic: fitted cubic is not monotone on its voltage window");
  return m;
}

/// Fraction of the window width the valid-range inversion may reach beyond the
/// data hull. Sampled sweeps stop a fraction of a sample short of the gap edges.
inline constexpr double kValidRangeMargin = 0.05;

namespace detail {

inline double invert_with_margin(const CubicModel& m, double target, int adc_max) {
  CubicModel ext = m;
  const double pad = kValidRangeMargin * m.v_window.width();
  ext.v_window = {std::max(0.0, m.v_window.lo - pad), std::min<double>(adc_max, m.v_window.hi + pad)};
  if (!is_monotone(ext)) ext.v_window = m.v_window;
  return invert_cubic(ext, target);
}

inline ValidRange outward(double a, double b, int adc_max) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  ValidRange r{static_cast<int>(std::floor(lo)), static_cast<int>(std::ceil(hi))};
  r.v_min = std::max(r.v_min, 0);
  r.v_max = std::min(r.v_max, adc_max);
  if (!(r.v_min < r.v_max)) throw FitError("valid range collapsed to an empty interval");
  return r;
}

}  // namespace detail

/// Accepted ADC windows for both wheel wipers: the voltages bounding each
/// wiper's shifted angle span, rounded outward to whole counts.
inline std::array<ValidRange, 2> compute_valid_ranges(const CubicModel& m0, const CubicModel& m1,
                                                      const WheelGeometry& geometry = {}, int adc_max = 1023) {
  std::array<ValidRange, 2> out;
  const CubicModel* models[2] = {&m0, &m1};
  for (int w = 0; w < 2; ++w) {
    const Interval span = geometry.shifted_span(w);
    out[w] = detail::outward(detail::invert_with_margin(*models[w], span.lo, adc_max),
                             detail::invert_with_margin(*models[w], span.hi, adc_max), adc_max);
  }
  return out;
}

/// Residuals of `models` (one per wiper) on the trimmed/shifted pairs of `ds`.
inline FitReport fit_report(const CalibrationDataset& ds, const std::vector<CubicModel>& models,
                            const WheelGeometry& geometry = {}) {
  const auto pairs = trim_and_shift(ds, geometry);
  if (models.size() != pairs.size()) throw ConfigError("fit_report: model count does not match sensor kind");
  FitReport report;
  for (std::size_t w = 0; w < pairs.size(); ++w) {
    WiperFitStats st;
    st.samples = pairs[w].size();
    double sum_sq = 0.0;
    for (const auto& p : pairs[w]) {
      const double r = p.theta - models[w](p.v);
      sum_sq += r * r;
      st.max_abs = std::max(st.max_abs, std::abs(r));
    }
    st.rms = std::sqrt(sum_sq / static_cast<double>(st.samples));
    report.wipers.push_back(st);
  }
  return report;
}

/// Fitted models, acceptance windows and residuals for one sensor.
struct Characterization {
  DofKind sensor_kind = DofKind::wheel;
  int adc_max = 1023;
  std::vector<CubicModel> models;
  std::vector<ValidRange> valid_ranges;
  FitReport report;
};

/// trim/shift -> fit -> valid ranges -> residual report.
inline Characterization characterize(const CalibrationDataset& ds, const WheelGeometry& geometry = {}) {
  Characterization c;
  c.sensor_kind = ds.sensor_kind;
  c.adc_max = ds.adc_max;
  const auto pairs = trim_and_shift(ds, geometry);
  for (const auto& p : pairs) c.models.push_back(fit_cubic(p, ds.adc_max));
  if (ds.sensor_kind == DofKind::wheel) {
    const auto ranges = compute_valid_ranges(c.models[0], c.models[1], geometry, ds.adc_max);
    c.valid_ranges.assign(ranges.begin(), ranges.end());
  } else {
    const Interval w = c.models[0].v_window;
    c.valid_ranges.push_back(detail::outward(w.lo, w.hi, ds.adc_max));
  }
  c.report = fit_report(ds, c.models, geometry);
  return c;
}

}  // namespace paintpot
