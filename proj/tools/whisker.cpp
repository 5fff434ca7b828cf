// whisker: command-line front end for the sensor model.
//
//   whisker forward   --velocity 0.5 --theta 0
//   whisker invert    --bx 40 --by 3        (or --readings trace.csv)
//   whisker calibrate --synthesize 20 --noise 1
//   whisker sweep     --axis1 diameter_mm=1,2,3 --axis2 depth_mm=10:40:10
//   whisker simulate  --profile profile.json --noise 1
//
// Exit codes: 0 success, 2 configuration or argument error, 3 data error.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "whisker/calibration.hpp"
#include "whisker/config.hpp"
#include "whisker/design_explorer.hpp"
#include "whisker/errors.hpp"
#include "whisker/flow_sim.hpp"
#include "whisker/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace whisker;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Globals {
  std::string config_path;
  std::string out_dir = "whisker_out";
  std::uint64_t seed = 0;
  std::string format = "text";
};

ResolvedConfig resolve_config(const Globals& g) {
  if (!g.config_path.empty()) return load_config(g.config_path);
  if (const char* env = std::getenv("WHISKER_CONFIG"); env && *env) return load_config(env);
  return default_config();
}

std::string fmt_num(double v) { return fmt::format("{}", v); }

// ---- forward ---------------------------------------------------------------

struct ForwardArgs {
  double velocity = 0.0;
  double theta = 0.0;
};

int run_forward(const Globals& g, const ForwardArgs& a) {
  const ResolvedConfig config = resolve_config(g);
  const SensorModel model(config.design);
  const FlowState flow{a.velocity, a.theta, config.fluid_density};
  const ForwardResult r = model.forward(flow);
  const double phi_deg = r.deflection.phi_rad * 180.0 / std::numbers::pi;

  if (g.format == "json") {
    const json out = {
        {"design_fingerprint", config.fingerprint()},
        {"velocity_mps", a.velocity},
        {"theta_deg", normalize_degrees(a.theta)},
        {"drag_force_N", r.drag_force_N},
        {"moment_arm_m", r.moment_arm_m},
        {"drag_moment_Nm", r.drag_moment_Nm},
        {"phi_def_rad", r.deflection.phi_rad},
        {"phi_def_deg", phi_deg},
        {"saturated", r.deflection.saturated},
        {"delta_mT", {{"bx", r.delta.bx_mT}, {"by", r.delta.by_mT}, {"bz", r.delta.bz_mT}}},
        {"reading_lsb", {{"bx", r.reading.bx}, {"by", r.reading.by}, {"bz", r.reading.bz}}},
        {"reading_clipped", r.reading.saturated},
    };
    std::cout << out.dump(2) << "\n";
  } else if (g.format == "csv") {
    std::cout << "quantity,value,unit\n"
              << "velocity," << fmt_num(a.velocity) << ",m/s\n"
              << "theta," << fmt_num(normalize_degrees(a.theta)) << ",deg\n"
              << "drag_force," << fmt_num(r.drag_force_N) << ",N\n"
              << "moment_arm," << fmt_num(r.moment_arm_m) << ",m\n"
              << "drag_moment," << fmt_num(r.drag_moment_Nm) << ",N m\n"
              << "phi_def," << fmt_num(r.deflection.phi_rad) << ",rad\n"
              << "saturated," << (r.deflection.saturated ? 1 : 0) << ",\n"
              << "delta_bx," << fmt_num(r.delta.bx_mT) << ",mT\n"
              << "delta_by," << fmt_num(r.delta.by_mT) << ",mT\n"
              << "delta_bz," << fmt_num(r.delta.bz_mT) << ",mT\n"
              << "bx," << r.reading.bx << ",LSB\n"
              << "by," << r.reading.by << ",LSB\n"
              << "bz," << r.reading.bz << ",LSB\n";
  } else {
    std::cout << fmt::format("design      {}\n", config.preset.value_or("custom"))
              << fmt::format("flow        v = {} m/s, theta = {} deg\n", a.velocity, normalize_degrees(a.theta))
              << fmt::format("F           = {:.6e} N\n", r.drag_force_N)
              << fmt::format("r           = {:.6f} m\n", r.moment_arm_m)
              << fmt::format("M_drag      = {:.6e} N m\n", r.drag_moment_Nm)
              << fmt::format("phi_def     = {:.6f} rad ({:.3f} deg){}\n", r.deflection.phi_rad, phi_deg,
                             r.deflection.saturated ? "  [at stop]" : "")
              << fmt::format("dB          = ({:.4f}, {:.4f}, {:.4f}) mT\n", r.delta.bx_mT, r.delta.by_mT,
                             r.delta.bz_mT)
              << fmt::format("reading     = ({}, {}, {}) LSB{}\n", r.reading.bx, r.reading.by, r.reading.bz,
                             r.reading.saturated ? "  [clipped]" : "");
  }
  return 0;
}

// ---- invert ----------------------------------------------------------------

struct InvertArgs {
  std::optional<double> bx;
  std::optional<double> by;
  std::string readings;
  std::string calibration;
};

struct InvertRow {
  double t_s;
  double bx;
  double by;
  double speed;
  std::optional<double> theta;
  bool saturated;
};

int run_invert(const Globals& g, const InvertArgs& a) {
  const ResolvedConfig config = resolve_config(g);
  const SensorModel model(config.design);
  std::optional<CalibrationModel> calibration;
  if (!a.calibration.empty()) calibration = calibration_from_json(read_json_file(a.calibration));

  std::vector<SensorReading> readings;
  if (!a.readings.empty()) {
    for (const TraceRow& row : read_trace_csv(fs::path(a.readings)).rows) readings.push_back(row.reading);
  } else {
    if (!a.bx || !a.by) throw ConfigError("invert needs --bx and --by, or --readings");
    if (*a.bx != std::round(*a.bx) || *a.by != std::round(*a.by)) {
      throw DataError("--bx and --by are whole LSB counts");
    }
    SensorReading r;
    r.bx = static_cast<int>(*a.bx);
    r.by = static_cast<int>(*a.by);
    readings.push_back(r);
  }

  std::vector<InvertRow> rows;
  for (const SensorReading& r : readings) {
    InvertRow row{r.t_s, static_cast<double>(r.bx), static_cast<double>(r.by), 0.0, std::nullopt, false};
    if (calibration) {
      const CalibratedEstimate e = apply_calibration(*calibration, r);
      row.speed = e.speed_mps;
      row.theta = e.theta_deg;
      row.saturated = e.saturated;
    } else {
      const SpeedEstimate e = model.invert_speed(r, config.fluid_density);
      row.speed = e.speed_mps;
      row.saturated = e.saturated;
      if (r.bx != 0 || r.by != 0) row.theta = invert_orientation(r);
    }
    rows.push_back(row);
  }

  if (g.format == "json") {
    json out = json::array();
    for (const InvertRow& r : rows) {
      out.push_back({{"t_s", r.t_s},
                     {"bx_lsb", r.bx},
                     {"by_lsb", r.by},
                     {"speed_mps", r.speed},
                     {"theta_deg", r.theta ? json(*r.theta) : json(nullptr)},
                     {"saturated", r.saturated}});
    }
    std::cout << json{{"method", calibration ? "calibration" : "model"}, {"estimates", out}}.dump(2) << "\n";
  } else if (g.format == "csv" || rows.size() > 1) {
    std::cout << "# units: t_s [s], bx_lsb/by_lsb [LSB], speed_mps [m/s], theta_deg [deg]\n"
              << "t_s,bx_lsb,by_lsb,speed_mps,theta_deg,saturated\n";
    for (const InvertRow& r : rows) {
      std::cout << fmt::format("{},{},{},{},{},{}\n", r.t_s, r.bx, r.by, r.speed, r.theta ? fmt_num(*r.theta) : "",
                               r.saturated ? 1 : 0);
    }
  } else {
    const InvertRow& r = rows.front();
    std::cout << fmt::format("speed       = {:.5f} m/s{}\n", r.speed, r.saturated ? "  [saturated]" : "")
              << (r.theta ? fmt::format("theta       = {:.3f} deg\n", *r.theta)
                          : std::string("theta       = undefined (zero reading)\n"));
  }
  return 0;
}

// ---- calibrate -------------------------------------------------------------

struct CalibrateArgs {
  std::string samples;
  std::size_t synthesize = 0;
  double noise = 0.0;
};

int run_calibrate(const Globals& g, const CalibrateArgs& a) {
  const ResolvedConfig config = resolve_config(g);
  const std::string fingerprint = config.fingerprint();
  CalibrationSamples samples;
  if (!a.samples.empty()) {
    samples = read_calibration_csv(fs::path(a.samples));
  } else if (a.synthesize > 0) {
    const SensorModel model(config.design);
    samples = synthesize_calibration(model, a.synthesize, a.noise, g.seed, config.fluid_density);
  } else {
    throw ConfigError("calibrate needs --samples or --synthesize N");
  }

  CalibrationModel fit = fit_calibration(samples);
  fit.design_fingerprint = fingerprint;

  const fs::path dir(g.out_dir);
  json doc = to_json(fit);
  doc["manifest"] = kManifestName;
  write_text_file(dir / "calibration.json", doc.dump(2) + "\n");
  write_text_file(dir / "calibration_residuals.csv", calibration_residuals_csv(fit, samples));

  RunManifest manifest;
  manifest.command = "calibrate";
  manifest.fingerprint = fingerprint;
  if (a.samples.empty()) manifest.seed = g.seed;
  manifest.arguments = {{"samples", a.samples}, {"synthesize", a.synthesize}, {"noise_sigma_lsb", a.noise}};
  manifest.outputs = {"calibration.json", "calibration_residuals.csv"};
  write_manifest(dir, manifest);

  if (g.format == "json") {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << fmt::format("v     = {:.6g} x^2 + {:.6g} x   (x in {}, R^2 = {:.4f}, {} samples)\n", fit.a, fit.b,
                             fit.magnitude_unit, fit.r2_speed, fit.speed_samples)
              << fmt::format("theta = {:.6g} u               (R^2 = {:.4f}, {} samples)\n", fit.c,
                             fit.r2_orientation, fit.orientation_samples)
              << fmt::format("wrote {}\n", (dir / "calibration.json").string());
  }
  return 0;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::string axis1;
  std::string axis2;
  unsigned workers = 0;
};

int run_sweep(const Globals& g, const SweepArgs& a) {
  const ResolvedConfig config = resolve_config(g);
  const SweepAxis axis1 = parse_axis(a.axis1);
  std::optional<SweepAxis> axis2;
  if (!a.axis2.empty()) axis2 = parse_axis(a.axis2);

  SweepGrid grid = sweep(config.design, axis1, axis2, config.fluid_density, a.workers);
  grid.design_fingerprint = config.fingerprint();

  const fs::path dir(g.out_dir);
  write_text_file(dir / "sweep.csv", sweep_csv(grid));
  write_text_file(dir / "sweep.json", sweep_json(grid).dump(2) + "\n");

  RunManifest manifest;
  manifest.command = "sweep";
  manifest.fingerprint = grid.design_fingerprint;
  manifest.arguments = {{"axis1", a.axis1}, {"axis2", a.axis2}};
  manifest.outputs = {"sweep.csv", "sweep.json"};
  write_manifest(dir, manifest);

  std::size_t valid = 0;
  for (const SweepCell& cell : grid.cells) valid += cell.valid() ? 1 : 0;
  if (g.format == "json") {
    std::cout << json{{"cells", grid.cells.size()}, {"valid", valid}, {"outputs", manifest.outputs}}.dump(2) << "\n";
  } else if (g.format == "csv") {
    std::cout << sweep_csv(grid);
  } else {
    std::cout << fmt::format("{} cells ({} valid), wrote {}\n", grid.cells.size(), valid,
                             (dir / "sweep.csv").string());
  }
  return 0;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string profile;
  std::optional<double> velocity;
  double theta = 0.0;
  double duration = 10.0;
  std::string viv = "on";
  double noise = 0.0;
  double rate = 100.0;
  std::string estimator = "model";
  std::size_t window = 10;
};

int run_simulate(const Globals& g, const SimulateArgs& a) {
  const ResolvedConfig config = resolve_config(g);
  const std::string fingerprint = config.fingerprint();
  const SensorModel model(config.design);

  VelocityProfile profile;
  if (!a.profile.empty()) {
    profile = load_profile(a.profile);
  } else if (a.velocity) {
    profile = VelocityProfile::constant(*a.velocity, a.theta, a.duration);
  } else {
    throw ConfigError("simulate needs --profile or --velocity");
  }

  EstimatorConfig estimator;
  estimator.window_samples = a.window;
  if (a.estimator.rfind("calibration:", 0) == 0) {
    estimator.calibration = calibration_from_json(read_json_file(a.estimator.substr(12)));
  } else if (a.estimator != "model") {
    throw ConfigError(fmt::format("--estimator must be 'model' or 'calibration:<file>' (got '{}')", a.estimator));
  }

  SynthesisOptions options;
  options.sample_rate_hz = a.rate;
  options.noise_sigma_lsb = a.noise;
  options.seed = g.seed;
  options.fluid_density = config.fluid_density;
  options.viv.enabled = a.viv == "on";

  SimTrace trace = synthesize(model, profile, options);
  trace.design_fingerprint = fingerprint;
  for (const std::string& w : trace.warnings) std::cerr << "warning: " << w << "\n";

  const auto estimates = estimate_stream(trace, model, estimator);
  const StreamScore s = score(estimates, trace);

  const json report = {
      {"manifest", kManifestName},
      {"design_fingerprint", fingerprint},
      {"estimator", estimator.calibration ? "calibration" : "model"},
      {"window_samples", a.window},
      {"samples", trace.rows.size()},
      {"speed_rmse_mps", s.speed_rmse_mps},
      {"speed_samples", s.speed_samples},
      {"theta_rmse_deg", s.theta_rmse_deg ? json(*s.theta_rmse_deg) : json(nullptr)},
      {"theta_samples", s.theta_samples},
      {"warnings", trace.warnings},
      {"units", {{"speed_rmse_mps", "m/s"}, {"theta_rmse_deg", "deg"}}},
  };

  const fs::path dir(g.out_dir);
  write_text_file(dir / "trace.csv", trace_csv(trace));
  write_text_file(dir / "estimates.csv", estimates_csv(estimates, fingerprint));
  write_text_file(dir / "report.json", report.dump(2) + "\n");

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.fingerprint = fingerprint;
  manifest.seed = g.seed;
  manifest.arguments = {{"profile", a.profile},
                        {"velocity_mps", a.velocity ? json(*a.velocity) : json(nullptr)},
                        {"theta_deg", a.theta},
                        {"duration_s", a.duration},
                        {"viv", a.viv},
                        {"noise_sigma_lsb", a.noise},
                        {"sample_rate_hz", a.rate},
                        {"estimator", a.estimator},
                        {"window_samples", a.window}};
  manifest.outputs = {"trace.csv", "estimates.csv", "report.json"};
  write_manifest(dir, manifest);

  if (g.format == "json") {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << fmt::format("speed RMSE  = {:.5f} m/s over {} samples\n", s.speed_rmse_mps, s.speed_samples);
    if (s.theta_rmse_deg) {
      std::cout << fmt::format("theta RMSE  = {:.3f} deg over {} samples\n", *s.theta_rmse_deg, s.theta_samples);
    }
    std::cout << fmt::format("wrote {}\n", dir.string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whisker flow-sensor model: forward chain, inversion, calibration, design sweeps, simulation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "Design config JSON (default: $WHISKER_CONFIG, else preset Rod3)");
  app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for noise generation")->capture_default_str();
  app.add_option("--format", g.format, "Console output format")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->capture_default_str();

  ForwardArgs fwd;
  auto* forward = app.add_subcommand("forward", "Evaluate the forward chain for one flow state");
  forward->add_option("--velocity,-v", fwd.velocity, "Flow speed (m/s)")->required();
  forward->add_option("--theta", fwd.theta, "Flow direction (deg)")->capture_default_str();

  InvertArgs inv;
  auto* invert = app.add_subcommand("invert", "Estimate speed and direction from readings");
  invert->add_option("--bx", inv.bx, "x reading (LSB)");
  invert->add_option("--by", inv.by, "y reading (LSB)");
  invert->add_option("--readings", inv.readings, "CSV with t_s,bx_lsb,by_lsb,bz_lsb")->check(CLI::ExistingFile);
  invert->add_option("--calibration", inv.calibration, "Use a calibration model instead of the physics model")
      ->check(CLI::ExistingFile);

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Fit speed and orientation calibration curves");
  auto* samples_opt =
      calibrate->add_option("--samples", cal.samples, "CSV with bx_lsb,by_lsb,speed_mps,theta_deg")
          ->check(CLI::ExistingFile);
  calibrate->add_option("--synthesize", cal.synthesize, "Synthesize N speed and N direction samples")
      ->excludes(samples_opt);
  calibrate->add_option("--noise", cal.noise, "Noise sigma for synthesized samples (LSB)")->capture_default_str();

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate design metrics over a parameter grid");
  sweep_cmd->add_option("--axis1", sw.axis1, "parameter=v1,v2,... or parameter=start:stop:step")->required();
  sweep_cmd->add_option("--axis2", sw.axis2, "Second axis, same syntax");
  sweep_cmd->add_option("--workers", sw.workers, "Worker threads (0 = all cores)")->capture_default_str();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Synthesize a sensor stream, estimate and score it");
  auto* profile_opt = simulate->add_option("--profile", sim.profile, "Velocity profile JSON")->check(CLI::ExistingFile);
  simulate->add_option("--velocity", sim.velocity, "Constant speed (m/s) instead of a profile")->excludes(profile_opt);
  simulate->add_option("--theta", sim.theta, "Direction for a constant profile (deg)")->capture_default_str();
  simulate->add_option("--duration", sim.duration, "Duration of a constant profile (s)")->capture_default_str();
  simulate->add_option("--viv", sim.viv, "Synthetic shedding tone")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  simulate->add_option("--noise", sim.noise, "Gaussian noise sigma (LSB)")->capture_default_str();
  simulate->add_option("--rate", sim.rate, "Sample rate (Hz)")->capture_default_str();
  simulate->add_option("--estimator", sim.estimator, "model or calibration:<file>")->capture_default_str();
  simulate->add_option("--window", sim.window, "Moving-average window (samples)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*forward) return run_forward(g, fwd);
    if (*invert) return run_invert(g, inv);
    if (*calibrate) return run_calibrate(g, cal);
    if (*sweep_cmd) return run_sweep(g, sw);
    if (*simulate) return run_simulate(g, sim);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
