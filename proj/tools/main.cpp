#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

int run(int argc, char** argv) {
  using namespace paintpot;
  CLI::App app{"paintpot: potentiometer simulation, calibration and joint-angle filtering"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  double rate_hz = 14.0;
  double duration_s = 50.0;
  std::string config;
  std::string out;
  std::string input;
  std::string kind = "wheel";

  auto* sweep = app.add_subcommand("sweep", "synthesize a calibration log from a sensor spec");
  sweep->add_option("--config", config, "sensor spec JSON")->required();
  sweep->add_option("--out", out, "output CSV")->required();
  sweep->add_option("--seed", seed, "random seed");
  sweep->add_option("--rate-hz", rate_hz, "sample rate")->capture_default_str();
  sweep->add_option("--duration-s", duration_s, "sweep duration, both directions")->capture_default_str();

  auto* calibrate = app.add_subcommand("calibrate", "fit cubic models and valid ranges from a calibration log");
  calibrate->add_option("input", input, "calibration CSV (t,theta,v0[,v1])")->required();
  calibrate->add_option("--kind", kind, "sensor kind")->check(CLI::IsMember({"wheel", "tilt"}))->capture_default_str();
  calibrate->add_option("--config", config, "optional sensor spec JSON (gap geometry, ADC depth)");
  calibrate->add_option("--out", out, "output model bundle JSON")->required();

  auto* estimate = app.add_subcommand("estimate", "run the filter over a reading log");
  estimate->add_option("input", input, "reading CSV (t,v0[,v1],omega)")->required();
  estimate->add_option("--config", config, "model bundle JSON")->required();
  estimate->add_option("--out", out, "output trace CSV")->required();

  auto* experiment = app.add_subcommand("experiment", "closed-loop trajectory tracking run");
  experiment->add_option("--config", config, "experiment config JSON or bundled config name")->required();
  experiment->add_option("--out", out, "output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*sweep) {
    cli::cmd_sweep(config, out, seed, rate_hz, duration_s);
  } else if (*calibrate) {
    cli::cmd_calibrate(input, parse_kind(kind), out, config);
  } else if (*estimate) {
    cli::cmd_estimate(config, input, out);
  } else if (*experiment) {
    const auto r = cli::cmd_experiment(config, out);
    std::printf("avg_abs_error %.6f rad, max_abs_error %.6f rad, %zu steps\n", r.avg_abs_error, r.max_abs_error,
                r.rows.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const paintpot::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
