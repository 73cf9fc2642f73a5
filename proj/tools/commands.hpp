#pragma once

// Implementation of the paintpot command-line verbs. Kept in a header so the
// test suites can drive the commands without spawning a process.

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "paintpot/paintpot.hpp"

namespace paintpot::cli {

/// Constant-speed sweep over the sensor's full range and back.
/// Wiper counts inside a gap are written as 0; calibration drops them by angle.
inline CalibrationDataset generate_sweep(const SensorSpec& spec, double rate_hz, double duration_s, std::uint64_t seed) {
  if (!(rate_hz > 0.0)) throw ConfigError("sweep: rate-hz must be > 0");
  if (!(duration_s > 0.0)) throw ConfigError("sweep: duration-s must be > 0");
  const bool wheel = spec.kind == DofKind::wheel;
  const Interval range = wheel ? Interval{-kPi, kPi} : spec.tilt.angle_range;
  Rng rng(seed);
  CalibrationDataset ds;
  ds.sensor_kind = spec.kind;
  ds.adc_max = spec.adc_max();
  const auto n = static_cast<long>(std::floor(duration_s * rate_hz + 1e-9));
  const double half = 0.5 * duration_s;
  for (long i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    const double phase = t <= half ? t / half : 2.0 - t / half;
    double theta = std::clamp(range.lo + range.width() * phase, range.lo, range.hi);
    CalibrationSample s;
    s.t = t;
    if (wheel) {
      theta = canonical_wheel_angle(theta);
      const auto rd = read_wheel(theta, spec.wheel, rng);
      s.v0 = rd[0].available ? rd[0].count : 0;
      s.v1 = rd[1].available ? rd[1].count : 0;
    } else {
      s.v0 = read_tilt(theta, spec.tilt, rng).count;
    }
    s.theta = theta;
    ds.samples.push_back(s);
  }
  return ds;
}

/// Per-row filter output for an offline reading log.
struct EstimateRow {
  double t = 0.0;
  GaussianBelief belief;
  std::array<bool, 2> feature{false, false};
};

/// Runs the bundle's filter over a reading log; the first row initializes.
/// Row omega is the motor speed over the interval ending at that row.
inline std::vector<EstimateRow> run_estimate(const ModelBundle& bundle, const std::vector<ReadingRow>& rows) {
  std::vector<EstimateRow> out;
  out.reserve(rows.size());
  if (bundle.fit.sensor_kind == DofKind::wheel) {
    WheelFilter filter(bundle.wheel_observation(), bundle.transition(), bundle.filter.sigma0);
    for (const auto& r : rows) {
      const auto step = filter.step(r.omega, r.readings);
      out.push_back({r.t, step.belief, step.feature_used});
    }
  } else {
    TiltFilter filter(bundle.tilt_observation(), bundle.transition(), bundle.filter.sigma0);
    for (const auto& r : rows) {
      const auto step = filter.step(r.omega, r.readings[0]);
      out.push_back({r.t, step.belief, step.feature_used});
    }
  }
  return out;
}

inline std::string estimate_csv(const std::vector<EstimateRow>& rows) {
  std::ostringstream out;
  out << "t,mu,sigma,f0_used,f1_used\n";
  for (const auto& r : rows) {
    out << format_real(r.t) << ',' << format_real(r.belief.mu) << ',' << format_real(r.belief.sigma) << ','
        << (r.feature[0] ? 1 : 0) << ',' << (r.feature[1] ? 1 : 0) << '\n';
  }
  return out.str();
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

/// `sweep`: synthesize a calibration log from a sensor spec file.
inline void cmd_sweep(const std::string& spec_path, const std::string& out_csv, std::uint64_t seed, double rate_hz,
                      double duration_s) {
  const std::string spec_text = read_file(spec_path);
  const SensorSpec spec = sensor_spec_from_json(parse_json(spec_text, spec_path));
  const auto ds = generate_sweep(spec, rate_hz, duration_s, seed);
  std::ostringstream csv;
  write_calibration_csv(csv, ds);
  RunManifest m{"sweep", {spec_path}, out_csv, seed,
                fnv1a_hex(spec_text + "|" + format_real(rate_hz) + "|" + format_real(duration_s))};
  write_file(out_csv, csv.str());
  Json j;
  j["manifest"] = manifest_to_json(m);
  j["samples"] = ds.samples.size();
  write_file(manifest_path(out_csv), dump(j));
}

/// `calibrate`: fit a model bundle from a calibration log. An optional sensor
/// spec supplies gap geometry and ADC depth; defaults otherwise.
inline ModelBundle cmd_calibrate(const std::string& in_csv, DofKind kind, const std::string& out_json,
                                 const std::string& spec_path = {}, FilterParams filter = {}) {
  WheelGeometry geometry;
  int adc_max = 1023;
  std::string spec_text;
  if (!spec_path.empty()) {
    spec_text = read_file(spec_path);
    const SensorSpec spec = sensor_spec_from_json(parse_json(spec_text, spec_path));
    if (spec.kind != kind) throw ConfigError("calibrate: --kind does not match the sensor spec");
    geometry = spec.wheel.geometry;
    adc_max = spec.adc_max();
  }
  const std::string csv_text = read_file(in_csv);
  std::istringstream in(csv_text);
  const auto ds = ingest_log(in, kind, adc_max);
  auto bundle = make_bundle(characterize(ds, geometry), geometry, std::move(filter));
  Json j = bundle_to_json(bundle);
  std::vector<std::string> inputs{in_csv};
  if (!spec_path.empty()) inputs.push_back(spec_path);
  j["manifest"] = manifest_to_json({"calibrate", inputs, out_json, 0, fnv1a_hex(csv_text + "|" + spec_text)});
  write_file(out_json, dump(j));
  return bundle;
}

/// `estimate`: filter a reading log offline with a model bundle.
inline std::vector<EstimateRow> cmd_estimate(const std::string& model_json, const std::string& readings_csv,
                                             const std::string& out_csv) {
  const std::string model_text = read_file(model_json);
  const auto bundle = bundle_from_json(parse_json(model_text, model_json));
  const std::string log_text = read_file(readings_csv);
  std::istringstream in(log_text);
  const auto rows = read_readings_csv(in, bundle.fit.sensor_kind, bundle.fit.adc_max);
  const auto trace = run_estimate(bundle, rows);
  write_file(out_csv, estimate_csv(trace));
  Json j;
  j["manifest"] = manifest_to_json(
      {"estimate", {model_json, readings_csv}, out_csv, 0, fnv1a_hex(model_text + "|" + log_text)});
  j["rows"] = trace.size();
  write_file(manifest_path(out_csv), dump(j));
  return trace;
}

/// Experiment configuration file, resolved to run inputs.
struct LoadedExperiment {
  std::string name;
  ExperimentConfig config;
  Json echo;  ///< the configuration as read
};

/// Reads an experiment config. The sensor is given inline (`sensor`) or by
/// path (`sensor_file`, relative to the config). The observation model comes
/// from `model_file` if present, otherwise from a simulated calibration sweep
/// described by `calibration` {rate_hz, duration_s}, seeded from `seed`.
inline LoadedExperiment load_experiment(const Json& j, const std::filesystem::path& base_dir) {
  LoadedExperiment le;
  le.echo = j;
  le.name = j.value("name", std::string("experiment"));
  ExperimentConfig& cfg = le.config;
  cfg.kind = parse_kind(json_field(j, "kind").get<std::string>());
  cfg.seed = j.value("seed", std::uint64_t{0});

  SensorSpec sensor;
  if (j.contains("sensor")) {
    sensor = sensor_spec_from_json(j.at("sensor"));
  } else {
    const auto path = base_dir / json_field(j, "sensor_file").get<std::string>();
    sensor = sensor_spec_from_json(parse_json(read_file(path.string()), path.string()));
  }
  if (sensor.kind != cfg.kind) throw ConfigError("experiment: sensor kind does not match DOF kind");

  const Json filter = j.value("filter", Json::object());
  FilterParams fp;
  fp.k = json_real(filter, "k", 1.0);
  fp.dt = json_real(filter, "dt", 0.01);
  fp.q = json_real(filter, "q", kDefaultQ);
  fp.sigma0 = json_real(filter, "sigma0", kDefaultSigma0);

  ModelBundle bundle;
  if (j.contains("model_file")) {
    const auto path = base_dir / j.at("model_file").get<std::string>();
    bundle = bundle_from_json(parse_json(read_file(path.string()), path.string()));
    bundle.filter.k = fp.k;
    bundle.filter.dt = fp.dt;
    bundle.filter.q = fp.q;
    bundle.filter.sigma0 = fp.sigma0;
  } else {
    const Json cal = j.value("calibration", Json::object());
    const auto sweep = generate_sweep(sensor, json_real(cal, "rate_hz", 14.0), json_real(cal, "duration_s", 50.0),
                                      cfg.seed ^ 0x5eed5eedULL);
    bundle = make_bundle(characterize(sweep, sensor.wheel.geometry), sensor.wheel.geometry, fp);
  }
  if (bundle.fit.sensor_kind != cfg.kind) throw ConfigError("experiment: model kind does not match DOF kind");

  if (cfg.kind == DofKind::wheel) {
    cfg.wheel_sensor = sensor.wheel;
    cfg.wheel_obs = bundle.wheel_observation();
  } else {
    cfg.tilt_sensor = sensor.tilt;
    cfg.tilt_obs = bundle.tilt_observation();
  }
  cfg.filter = bundle.transition();
  cfg.sigma0 = bundle.filter.sigma0;

  const Json plant = j.value("plant", Json::object());
  cfg.q_true = json_real(plant, "q_true", 0.05);
  const Json ctrl = j.value("controller", Json::object());
  cfg.gains.kp = json_real(ctrl, "kp", 4.0);
  cfg.gains.omega_max = json_real(ctrl, "omega_max", 10.0);
  const Json& traj = json_field(j, "trajectory");
  cfg.x0 = json_real(json_field(traj, "x0"), "x0");
  cfg.xf = json_real(json_field(traj, "xf"), "xf");
  cfg.t_total = json_real(traj, "t_total", 5.0);
  cfg.validate();
  return le;
}

/// Longest run of consecutive rows where wiper 0's feature was not used.
inline std::size_t longest_gap(const ExperimentResult& r, int wiper) {
  std::size_t best = 0;
  std::size_t run = 0;
  for (const auto& row : r.rows) {
    run = row.feature[wiper] ? 0 : run + 1;
    best = std::max(best, run);
  }
  return best;
}

inline Json experiment_summary(const LoadedExperiment& le, const ExperimentResult& r, const RunManifest& m) {
  Json j;
  j["name"] = le.name;
  j["avg_abs_error"] = format_real(r.avg_abs_error);
  j["max_abs_error"] = format_real(r.max_abs_error);
  j["max_estimate_jump"] = format_real(max_estimate_jump(r));
  j["steps"] = r.rows.size();
  std::size_t unavailable[2] = {0, 0};
  for (const auto& row : r.rows) {
    for (int w = 0; w < 2; ++w) unavailable[w] += row.feature[w] ? 0 : 1;
  }
  j["feature_unavailable_steps"] = Json::array({unavailable[0], unavailable[1]});
  j["seed"] = le.config.seed;
  j["config"] = le.echo;
  j["manifest"] = manifest_to_json(m);
  return j;
}

/// Resolves a config argument: an existing file, or the name of a bundled config.
inline std::filesystem::path resolve_config(const std::string& arg) {
  namespace fs = std::filesystem;
  if (fs::exists(arg)) return arg;
#ifdef PAINTPOT_CONFIG_DIR
  const fs::path bundled = fs::path(PAINTPOT_CONFIG_DIR) / (arg + ".json");
  if (fs::exists(bundled)) return bundled;
#endif
  throw IoError("config '" + arg + "' not found");
}

/// `experiment`: closed-loop replica run. Writes <prefix>.csv, <prefix>.json
/// and <prefix>_readings.csv.
inline ExperimentResult cmd_experiment(const std::string& config_arg, const std::string& out_prefix) {
  const auto path = resolve_config(config_arg);
  const std::string text = read_file(path.string());
  const auto le = load_experiment(parse_json(text, path.string()), path.parent_path());
  const auto result = run_experiment(le.config);
  std::ostringstream trace;
  write_experiment_csv(trace, result);
  std::ostringstream readings;
  write_readings_csv(readings, result);
  const RunManifest m{"experiment", {config_arg}, out_prefix, le.config.seed, fnv1a_hex(text)};
  write_file(out_prefix + ".csv", trace.str());
  write_file(out_prefix + "_readings.csv", readings.str());
  write_file(out_prefix + ".json", dump(experiment_summary(le, result, m)));
  return result;
}

}  // namespace paintpot::cli
