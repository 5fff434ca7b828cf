#include "whisker/flow_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "whisker/errors.hpp"

namespace whisker {

void VelocityProfile::validate() const {
  if (knots.empty()) throw ConfigError("velocity profile has no knots");
  if (knots.front().t_s != 0.0) {
    throw ConfigError(fmt::format("velocity profile must start at t = 0 (starts at {})", knots.front().t_s));
  }
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const ProfileKnot& knot = knots[k];
    if (!std::isfinite(knot.t_s) || !std::isfinite(knot.speed_mps) || !std::isfinite(knot.theta_deg)) {
      throw ConfigError(fmt::format("velocity profile knot {} is not finite", k));
    }
    if (knot.speed_mps < 0.0) throw ConfigError(fmt::format("velocity profile knot {} has negative speed", k));
    if (k > 0 && !(knot.t_s > knots[k - 1].t_s)) {
      throw ConfigError(fmt::format("velocity profile times must strictly increase (knot {})", k));
    }
  }
  if (max_acceleration_mps2 && !(*max_acceleration_mps2 > 0.0)) {
    throw ConfigError("profile acceleration limit must be positive");
  }
}

ProfileKnot VelocityProfile::at(double t_s) const {
  if (t_s <= knots.front().t_s) return {t_s, knots.front().speed_mps, knots.front().theta_deg};
  if (t_s >= knots.back().t_s) return {t_s, knots.back().speed_mps, knots.back().theta_deg};
  const auto upper = std::upper_bound(knots.begin(), knots.end(), t_s,
                                      [](double t, const ProfileKnot& knot) { return t < knot.t_s; });
  const ProfileKnot& b = *upper;
  const ProfileKnot& a = *(upper - 1);
  const double w = (t_s - a.t_s) / (b.t_s - a.t_s);
  return {t_s, a.speed_mps + w * (b.speed_mps - a.speed_mps), a.theta_deg + w * (b.theta_deg - a.theta_deg)};
}

VelocityProfile VelocityProfile::constant(double speed_mps, double theta_deg, double duration_s) {
  VelocityProfile profile;
  profile.knots = {{0.0, speed_mps, theta_deg}, {duration_s, speed_mps, theta_deg}};
  return profile;
}

void VivConfig::validate() const {
  if (!(strouhal > 0.0)) throw ConfigError("Strouhal number must be positive");
  if (!(bell_width_mps > 0.0)) throw ConfigError("VIV bell width must be positive");
  if (bell_peak_mps < 0.0) throw ConfigError("VIV bell peak must be non-negative");
  if (bell_amplitude_mT < 0.0 || ramp_amplitude_mT < 0.0) throw ConfigError("VIV amplitudes must be non-negative");
  if (!(ramp_start_mps > 0.0) || !(ramp_end_mps > ramp_start_mps)) {
    throw ConfigError("VIV ramp needs 0 < start < end");
  }
}

double VivConfig::envelope_mT(WhiskerShape shape, double speed_mps) const {
  if (!enabled || speed_mps <= 0.0) return 0.0;
  if (shape == WhiskerShape::Rod) {
    auto bell = [&](double v) {
      const double z = (v - bell_peak_mps) / bell_width_mps;
      return std::exp(-0.5 * z * z);
    };
    // shifted down so the envelope starts at zero, rescaled to keep the peak
    const double floor = bell(0.0);
    return std::max(0.0, bell_amplitude_mT * (bell(speed_mps) - floor) / (1.0 - floor));
  }
  const double s = std::clamp((speed_mps - ramp_start_mps) / (ramp_end_mps - ramp_start_mps), 0.0, 1.0);
  return ramp_amplitude_mT * s * s * (3.0 - 2.0 * s);
}

double shedding_length_m(const WhiskerSpec& spec) {
  return spec.shape == WhiskerShape::Rod ? spec.width_m : spec.thickness_m;
}

double shedding_frequency_hz(const WhiskerSpec& spec, double speed_mps, double strouhal) {
  return strouhal * speed_mps / shedding_length_m(spec);
}

SimTrace synthesize(const SensorModel& model, const VelocityProfile& profile, const SynthesisOptions& options) {
  profile.validate();
  options.viv.validate();
  if (!(options.sample_rate_hz > 0.0) || !std::isfinite(options.sample_rate_hz)) {
    throw ConfigError("sample rate must be positive");
  }
  if (!(options.noise_sigma_lsb >= 0.0)) throw ConfigError("noise sigma must be non-negative");

  const SensorDesign& design = model.design();
  const double rate = options.sample_rate_hz;
  const double dt = 1.0 / rate;
  const double sensitivity = design.hall.sensitivity_lsb_per_mT;
  const auto samples = static_cast<std::size_t>(std::floor(profile.duration_s() * rate + 1e-9)) + 1;

  SimTrace trace;
  trace.sample_rate_hz = rate;
  trace.seed = options.seed;
  trace.noise_sigma_lsb = options.noise_sigma_lsb;
  trace.fluid_density = options.fluid_density;
  trace.viv = options.viv;
  trace.rows.reserve(samples);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  double phase = 0.0;
  double speed = profile.knots.front().speed_mps;
  double fastest_alias = 0.0;

  for (std::size_t k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / rate;
    const ProfileKnot target = profile.at(t);
    if (profile.max_acceleration_mps2 && k > 0) {
      const double step = *profile.max_acceleration_mps2 * dt;
      speed = std::clamp(target.speed_mps, speed - step, speed + step);
    } else {
      speed = target.speed_mps;
    }
    const double theta = normalize_degrees(target.theta_deg);

    FieldDelta total = model.forward({speed, theta, options.fluid_density}).delta;

    const double amplitude = options.viv.envelope_mT(design.whisker.shape, speed);
    const double f_shed = shedding_frequency_hz(design.whisker, speed, options.viv.strouhal);
    if (amplitude > 0.0) {
      const auto [c, s] = unit_direction(theta);
      const double tone = amplitude * std::sin(phase);
      total.bx_mT += -s * tone;
      total.by_mT += c * tone;
      if (f_shed > rate / 2.0) fastest_alias = std::max(fastest_alias, f_shed);
    }
    phase = std::fmod(phase + 2.0 * std::numbers::pi * f_shed * dt, 2.0 * std::numbers::pi);

    if (options.noise_sigma_lsb > 0.0) {
      const double scale = options.noise_sigma_lsb / sensitivity;
      total.bx_mT += scale * noise(rng);
      total.by_mT += scale * noise(rng);
      total.bz_mT += scale * noise(rng);
    }

    TraceRow row;
    row.t_s = t;
    row.speed_mps = speed;
    row.theta_deg = theta;
    row.reading = quantize(total, design.hall);
    row.reading.t_s = t;
    trace.rows.push_back(row);
  }

  if (fastest_alias > 0.0) {
    trace.warnings.push_back(fmt::format(
        "shedding frequency up to {:.1f} Hz exceeds the Nyquist limit {:.1f} Hz; the tone is aliased",
        fastest_alias, rate / 2.0));
  }
  return trace;
}

std::vector<StreamEstimate> estimate_stream(const SimTrace& trace, const SensorModel& model,
                                            const EstimatorConfig& config) {
  if (config.window_samples == 0) throw ConfigError("estimation window must be at least 1 sample");
  const double sensitivity = model.design().hall.sensitivity_lsb_per_mT;
  const double calibration_scale =
      config.calibration && config.calibration->magnitude_unit == "mT" ? 1.0 / sensitivity : 1.0;

  std::vector<StreamEstimate> out;
  out.reserve(trace.rows.size());
  long long sum_x = 0;
  long long sum_y = 0;
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const TraceRow& row = trace.rows[k];
    if (k > 0 && !(row.t_s > trace.rows[k - 1].t_s)) {
      throw DataError(fmt::format("trace timestamps must increase (row {})", k));
    }
    sum_x += row.reading.bx;
    sum_y += row.reading.by;
    if (k >= config.window_samples) {
      sum_x -= trace.rows[k - config.window_samples].reading.bx;
      sum_y -= trace.rows[k - config.window_samples].reading.by;
    }
    const std::size_t count = std::min(k + 1, config.window_samples);
    const double bx = static_cast<double>(sum_x) / static_cast<double>(count);
    const double by = static_cast<double>(sum_y) / static_cast<double>(count);
    const double magnitude = std::hypot(bx, by);

    StreamEstimate est;
    est.t_s = row.t_s;
    est.valid = k + 1 >= config.window_samples;
    if (config.calibration) {
      const CalibratedEstimate c =
          apply_calibration(*config.calibration, bx * calibration_scale, by * calibration_scale);
      est.speed_mps = c.speed_mps;
      est.saturated = c.saturated;
    } else {
      const SpeedEstimate s = model.invert_speed_counts(bx, by, trace.fluid_density);
      est.speed_mps = s.speed_mps;
      est.saturated = s.saturated;
    }
    if (magnitude > config.orientation_floor_lsb) {
      const double angle = invert_orientation(bx, by);
      est.theta_deg = config.calibration ? normalize_degrees(config.calibration->c * angle) : angle;
    }
    out.push_back(est);
  }
  return out;
}

CalibrationSamples synthesize_calibration(const SensorModel& model, std::size_t count, double noise_sigma_lsb,
                                          std::uint64_t seed, double fluid_density) {
  if (count == 0) throw ConfigError("calibration needs at least one sample per sweep");
  if (!(noise_sigma_lsb >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  const HallSpec& hall = model.design().hall;
  const double v_max = model.max_speed(0.0, fluid_density);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto measure = [&](double speed, double theta) {
    FieldDelta delta = model.forward({speed, theta, fluid_density}).delta;
    if (noise_sigma_lsb > 0.0) {
      const double scale = noise_sigma_lsb / hall.sensitivity_lsb_per_mT;
      delta.bx_mT += scale * noise(rng);
      delta.by_mT += scale * noise(rng);
      delta.bz_mT += scale * noise(rng);
    }
    return quantize(delta, hall);
  };

  CalibrationSamples out;
  const double n = static_cast<double>(count);
  for (std::size_t k = 1; k <= count; ++k) {
    const double speed = 0.9 * v_max * static_cast<double>(k) / n;
    out.speed.push_back({measure(speed, 0.0).magnitude_xy(), speed});
  }
  for (std::size_t k = 0; k < count; ++k) {
    const double theta = 360.0 * (static_cast<double>(k) + 0.5) / n;
    const SensorReading r = measure(0.5 * v_max, theta);
    if (r.bx == 0 && r.by == 0) continue;
    out.orientation.push_back({invert_orientation(r), theta});
  }
  return out;
}

double angle_difference_deg(double a_deg, double b_deg) {
  double d = std::fmod(a_deg - b_deg + 180.0, 360.0);
  if (d < 0.0) d += 360.0;
  return d - 180.0;
}

StreamScore score(std::span<const StreamEstimate> estimates, const SimTrace& trace) {
  if (estimates.size() != trace.rows.size()) {
    throw DataError(fmt::format("estimate series has {} samples but the trace has {}", estimates.size(),
                                trace.rows.size()));
  }
  double speed_sq = 0.0;
  double theta_sq = 0.0;
  StreamScore out;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    const StreamEstimate& est = estimates[k];
    const TraceRow& truth = trace.rows[k];
    if (std::abs(est.t_s - truth.t_s) > 1e-9) {
      throw DataError(fmt::format("estimate {} is at t = {} s but the trace row is at {} s", k, est.t_s, truth.t_s));
    }
    if (!est.valid) continue;
    const double dv = est.speed_mps - truth.speed_mps;
    speed_sq += dv * dv;
    ++out.speed_samples;
    if (est.theta_deg && truth.speed_mps > 0.0) {
      const double da = angle_difference_deg(*est.theta_deg, truth.theta_deg);
      theta_sq += da * da;
      ++out.theta_samples;
    }
  }
  if (out.speed_samples == 0) throw EmptyOverlap("no valid estimates overlap the trace");
  out.speed_rmse_mps = std::sqrt(speed_sq / static_cast<double>(out.speed_samples));
  if (out.theta_samples > 0) out.theta_rmse_deg = std::sqrt(theta_sq / static_cast<double>(out.theta_samples));
  return out;
}

}  // namespace whisker
