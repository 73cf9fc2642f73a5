#pragma once

// JSON and CSV formats shared by the library and the command-line tool.
// Reals that must survive a round trip (model coefficients) are written as
// decimal strings with 17 significant digits.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "paintpot/characterize.hpp"
#include "paintpot/error.hpp"
#include "paintpot/estimate.hpp"
#include "paintpot/geometry.hpp"
#include "paintpot/sensor_sim.hpp"
#include "paintpot/trajectory.hpp"

namespace paintpot {

using Json = nlohmann::ordered_json;

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Accepts a JSON number or a decimal string.
inline double json_real(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc{} && ptr == s.data() + s.size()) return value;
  }
  throw ConfigError(what + ": expected a number or decimal string");
}

inline double json_real(const Json& obj, const std::string& key, double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return json_real(obj.at(key), key);
}

inline const Json& json_field(const Json& obj, const std::string& key) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError("missing field '" + key + "'");
  return obj.at(key);
}

inline DofKind parse_kind(const std::string& s) {
  if (s == "wheel") return DofKind::wheel;
  if (s == "tilt") return DofKind::tilt;
  throw ConfigError("unknown sensor kind '" + s + "' (expected wheel or tilt)");
}

inline Json interval_to_json(const Interval& i) { return Json::array({format_real(i.lo), format_real(i.hi)}); }

inline Interval interval_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(what + ": expected [lo, hi]");
  return {json_real(j[0], what), json_real(j[1], what)};
}

inline Json cubic_to_json(const CubicModel& m) {
  Json j;
  j["c3"] = format_real(m.c3);
  j["c2"] = format_real(m.c2);
  j["c1"] = format_real(m.c1);
  j["c0"] = format_real(m.c0);
  j["v_window"] = interval_to_json(m.v_window);
  return j;
}

inline CubicModel cubic_from_json(const Json& j) {
  CubicModel m;
  m.c3 = json_real(json_field(j, "c3"), "c3");
  m.c2 = json_real(json_field(j, "c2"), "c2");
  m.c1 = json_real(json_field(j, "c1"), "c1");
  m.c0 = json_real(json_field(j, "c0"), "c0");
  if (j.contains("v_window")) m.v_window = interval_from_json(j.at("v_window"), "v_window");
  return m;
}

inline WheelGeometry geometry_from_json(const Json& j) {
  WheelGeometry g;
  if (j.is_object() && j.contains("gap_w0")) g.gap_w0 = interval_from_json(j.at("gap_w0"), "gap_w0");
  if (j.is_object() && j.contains("gap_w1")) g.gap_w1 = interval_from_json(j.at("gap_w1"), "gap_w1");
  return g;
}

inline Json geometry_to_json(const WheelGeometry& g) {
  return Json{{"gap_w0", interval_to_json(g.gap_w0)}, {"gap_w1", interval_to_json(g.gap_w1)}};
}

/// Sensor description: either a wheel or a tilt spec.
struct SensorSpec {
  DofKind kind = DofKind::wheel;
  WheelSensorSpec wheel;
  TiltSensorSpec tilt;

  int adc_max() const noexcept { return kind == DofKind::wheel ? wheel.adc_max : tilt.adc_max; }
};

inline SensorSpec sensor_spec_from_json(const Json& j) {
  SensorSpec s;
  s.kind = parse_kind(json_field(j, "kind").get<std::string>());
  const auto& truth = json_field(j, "truth");
  if (!truth.is_array()) throw ConfigError("truth: expected an array of cubic models");
  const int adc_max = j.value("adc_max", 1023);
  const double noise = json_real(j, "noise_std", 1.0);
  if (s.kind == DofKind::wheel) {
    if (truth.size() != 2) throw ConfigError("wheel spec: truth needs two models");
    s.wheel.geometry = geometry_from_json(j);
    s.wheel.adc_max = adc_max;
    s.wheel.noise_std = noise;
    s.wheel.truth_w0 = cubic_from_json(truth[0]);
    s.wheel.truth_w1 = cubic_from_json(truth[1]);
    if (!truth[0].contains("v_window")) s.wheel.truth_w0.v_window = {0.0, static_cast<double>(adc_max)};
    if (!truth[1].contains("v_window")) s.wheel.truth_w1.v_window = {0.0, static_cast<double>(adc_max)};
    s.wheel.validate();
  } else {
    if (truth.size() != 1) throw ConfigError("tilt spec: truth needs one model");
    if (j.contains("angle_range")) s.tilt.angle_range = interval_from_json(j.at("angle_range"), "angle_range");
    s.tilt.adc_max = adc_max;
    s.tilt.noise_std = noise;
    s.tilt.truth = cubic_from_json(truth[0]);
    if (!truth[0].contains("v_window")) s.tilt.truth.v_window = {0.0, static_cast<double>(adc_max)};
    s.tilt.validate();
  }
  return s;
}

inline Json sensor_spec_to_json(const SensorSpec& s) {
  Json j;
  j["kind"] = to_string(s.kind);
  if (s.kind == DofKind::wheel) {
    j["adc_max"] = s.wheel.adc_max;
    j["noise_std"] = format_real(s.wheel.noise_std);
    j["gap_w0"] = interval_to_json(s.wheel.geometry.gap_w0);
    j["gap_w1"] = interval_to_json(s.wheel.geometry.gap_w1);
    j["truth"] = Json::array({cubic_to_json(s.wheel.truth_w0), cubic_to_json(s.wheel.truth_w1)});
  } else {
    j["adc_max"] = s.tilt.adc_max;
    j["noise_std"] = format_real(s.tilt.noise_std);
    j["angle_range"] = interval_to_json(s.tilt.angle_range);
    j["truth"] = Json::array({cubic_to_json(s.tilt.truth)});
  }
  return j;
}

/// Filter settings stored alongside a characterization.
struct FilterParams {
  double q = kDefaultQ;
  double sigma0 = kDefaultSigma0;
  double dt = 0.01;
  double k = 1.0;
  std::vector<double> r;  ///< one variance per wiper
};

/// Everything a filter needs for one sensor.
struct ModelBundle {
  Characterization fit;
  WheelGeometry geometry;
  FilterParams filter;

  TransitionModel transition() const { return {filter.k, filter.dt, filter.q}; }

  WheelObservationModel wheel_observation() const {
    if (fit.sensor_kind != DofKind::wheel || fit.models.size() != 2 || fit.valid_ranges.size() != 2 ||
        filter.r.size() != 2) {
      throw ConfigError("model bundle is not a complete wheel bundle");
    }
    return {fit.models[0], fit.models[1], filter.r[0], filter.r[1], {fit.valid_ranges[0], fit.valid_ranges[1]},
            geometry};
  }

  TiltObservationModel tilt_observation() const {
    if (fit.sensor_kind != DofKind::tilt || fit.models.size() != 1 || filter.r.size() != 1) {
      throw ConfigError("model bundle is not a complete tilt bundle");
    }
    return {fit.models[0], filter.r[0]};
  }
};

/// Builds a bundle from a characterization, deriving each wiper's R from its fit residuals.
inline ModelBundle make_bundle(Characterization fit, const WheelGeometry& geometry, FilterParams filter = {}) {
  if (filter.r.empty()) {
    for (std::size_t w = 0; w < fit.models.size(); ++w) {
      filter.r.push_back(default_measurement_variance(fit.models[w], fit.report.wipers[w].rms));
    }
  }
  return {std::move(fit), geometry, std::move(filter)};
}

inline Json fit_report_to_json(const FitReport& r) {
  Json wipers = Json::array();
  for (const auto& w : r.wipers) {
    wipers.push_back({{"samples", w.samples}, {"rms", format_real(w.rms)}, {"max_abs", format_real(w.max_abs)}});
  }
  return Json{{"wipers", wipers}};
}

inline Json bundle_to_json(const ModelBundle& b) {
  Json j;
  j["sensor_kind"] = to_string(b.fit.sensor_kind);
  j["adc_max"] = b.fit.adc_max;
  if (b.fit.sensor_kind == DofKind::wheel) j["geometry"] = geometry_to_json(b.geometry);
  Json models = Json::array();
  for (const auto& m : b.fit.models) models.push_back(cubic_to_json(m));
  j["models"] = models;
  Json ranges = Json::array();
  for (const auto& r : b.fit.valid_ranges) ranges.push_back({{"v_min", r.v_min}, {"v_max", r.v_max}});
  j["valid_ranges"] = ranges;
  j["fit_report"] = fit_report_to_json(b.fit.report);
  Json f;
  f["q"] = format_real(b.filter.q);
  if (b.fit.sensor_kind == DofKind::wheel && b.filter.r.size() == 2) {
    f["r0"] = format_real(b.filter.r[0]);
    f["r1"] = format_real(b.filter.r[1]);
  } else if (b.filter.r.size() == 1) {
    f["r"] = format_real(b.filter.r[0]);
  }
  f["sigma0"] = format_real(b.filter.sigma0);
  f["dt"] = format_real(b.filter.dt);
  f["k"] = format_real(b.filter.k);
  j["filter"] = f;
  return j;
}

inline ModelBundle bundle_from_json(const Json& j) {
  ModelBundle b;
  b.fit.sensor_kind = parse_kind(json_field(j, "sensor_kind").get<std::string>());
  b.fit.adc_max = j.value("adc_max", 1023);
  if (j.contains("geometry")) b.geometry = geometry_from_json(j.at("geometry"));
  for (const auto& m : json_field(j, "models")) b.fit.models.push_back(cubic_from_json(m));
  for (const auto& r : json_field(j, "valid_ranges")) {
    b.fit.valid_ranges.push_back({json_field(r, "v_min").get<int>(), json_field(r, "v_max").get<int>()});
  }
  if (j.contains("fit_report")) {
    for (const auto& w : j.at("fit_report").at("wipers")) {
      b.fit.report.wipers.push_back({w.at("samples").get<std::size_t>(), json_real(w.at("rms"), "rms"),
                                     json_real(w.at("max_abs"), "max_abs")});
    }
  }
  const std::size_t expected = b.fit.sensor_kind == DofKind::wheel ? 2 : 1;
  if (b.fit.models.size() != expected || b.fit.valid_ranges.size() != expected) {
    throw ConfigError("model bundle: wrong number of models or valid ranges for the sensor kind");
  }
  for (std::size_t i = 0; i < expected; ++i) require_monotone(b.fit.models[i], "model bundle model " + std::to_string(i));
  const Json& f = json_field(j, "filter");
  b.filter.q = json_real(f, "q", kDefaultQ);
  b.filter.sigma0 = json_real(f, "sigma0", kDefaultSigma0);
  b.filter.dt = json_real(f, "dt", 0.01);
  b.filter.k = json_real(f, "k", 1.0);
  if (b.fit.sensor_kind == DofKind::wheel) {
    b.filter.r = {json_real(json_field(f, "r0"), "r0"), json_real(json_field(f, "r1"), "r1")};
  } else {
    b.filter.r = {json_real(json_field(f, "r"), "r")};
  }
  b.transition().validate();
  return b;
}

/// Provenance block echoed into every output.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::string output;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

inline Json manifest_to_json(const RunManifest& m) {
  return Json{{"command", m.command},
              {"inputs", m.inputs},
              {"output", m.output},
              {"seed", m.seed},
              {"config_hash", m.config_hash}};
}

inline void write_calibration_csv(std::ostream& out, const CalibrationDataset& ds) {
  out << (ds.sensor_kind == DofKind::wheel ? "t,theta,v0,v1\n" : "t,theta,v0\n");
  for (const auto& s : ds.samples) {
    out << format_real(s.t) << ',' << format_real(s.theta) << ',' << s.v0;
    if (ds.sensor_kind == DofKind::wheel) out << ',' << s.v1.value_or(0);
    out << '\n';
  }
}

/// Trace columns: t,theta_true,theta_est,theta_ref,u_cmd,f0_avail,f1_avail.
inline void write_experiment_csv(std::ostream& out, const ExperimentResult& r) {
  out << "t,theta_true,theta_est,theta_ref,u_cmd,f0_avail,f1_avail\n";
  for (const auto& row : r.rows) {
    out << format_real(row.t) << ',' << format_real(row.theta_true) << ',' << format_real(row.theta_est) << ','
        << format_real(row.theta_ref) << ',' << format_real(row.u_cmd) << ',' << (row.feature[0] ? 1 : 0) << ','
        << (row.feature[1] ? 1 : 0) << '\n';
  }
}

/// One row of a raw reading log: `t,v0[,v1],omega`. An empty v0/v1 field
/// marks a wiper without track contact.
struct ReadingRow {
  double t = 0.0;
  std::array<AdcReading, 2> readings{};
  double omega = 0.0;
};

inline void write_readings_csv(std::ostream& out, const ExperimentResult& r) {
  const bool wheel = r.kind == DofKind::wheel;
  out << (wheel ? "t,v0,v1,omega\n" : "t,v0,omega\n");
  for (const auto& row : r.rows) {
    out << format_real(row.t) << ',';
    if (row.readings[0].available) out << row.readings[0].count;
    if (wheel) {
      out << ',';
      if (row.readings[1].available) out << row.readings[1].count;
    }
    out << ',' << format_real(row.u_cmd) << '\n';
  }
}

inline std::vector<ReadingRow> read_readings_csv(std::istream& in, DofKind kind, int adc_max) {
  std::string line;
  long row = 1;
  if (!std::getline(in, line)) throw ParseError("empty readings log", row);
  const auto header = detail::split_csv(detail::trim(line));
  const bool wheel = kind == DofKind::wheel;
  const std::vector<std::string_view> expected =
      wheel ? std::vector<std::string_view>{"t", "v0", "v1", "omega"} : std::vector<std::string_view>{"t", "v0", "omega"};
  if (header != expected) throw ParseError(wheel ? "expected header t,v0,v1,omega" : "expected header t,v0,omega", row);
  std::vector<ReadingRow> rows;
  while (std::getline(in, line)) {
    ++row;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto fields = detail::split_csv(text);
    if (fields.size() != expected.size()) {
      throw ParseError("expected " + std::to_string(expected.size()) + " fields, got " + std::to_string(fields.size()),
                       row);
    }
    ReadingRow r;
    r.t = detail::parse_real(fields[0], "t", row);
    for (int w = 0; w < (wheel ? 2 : 1); ++w) {
      r.readings[w].wiper_index = w;
      const auto f = fields[1 + w];
      r.readings[w].available = !f.empty();
      if (!f.empty()) r.readings[w].count = detail::parse_count(f, w == 0 ? "v0" : "v1", adc_max, row);
    }
    if (!wheel) r.readings[1] = {1, 0, false};
    r.omega = detail::parse_real(fields.back(), "omega", row);
    if (!rows.empty() && r.t < rows.back().t) throw ParseError("timestamps decrease", row);
    rows.push_back(r);
  }
  if (rows.empty()) throw ParseError("readings log has no rows", row);
  return rows;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace paintpot
