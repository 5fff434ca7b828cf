// Desk-scale stand-in for field runs: sampled sensor streams from velocity
// profiles, with a synthetic vortex-shedding tone and Gaussian noise, plus
// the streaming estimator and its error score.
//
// The shedding tone is a test signal for channel separation and spectral
// tooling. It is not a hydrodynamic model.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "whisker/calibration.hpp"
#include "whisker/sensor_model.hpp"

namespace whisker {

struct ProfileKnot {
  double t_s = 0.0;
  double speed_mps = 0.0;
  double theta_deg = 0.0;
};

// Piecewise-linear in time; held at the last knot beyond the end.
struct VelocityProfile {
  std::vector<ProfileKnot> knots;
  // Rate limit on speed changes (m/s^2), applied while sampling.
  std::optional<double> max_acceleration_mps2;

  // Throws ConfigError unless t starts at 0 and strictly increases, and
  // every speed is finite and non-negative.
  void validate() const;
  double duration_s() const { return knots.empty() ? 0.0 : knots.back().t_s; }
  ProfileKnot at(double t_s) const;

  static VelocityProfile constant(double speed_mps, double theta_deg, double duration_s);
};

struct VivConfig {
  bool enabled = true;
  double strouhal = 0.2;
  // rods: bell over speed
  double bell_peak_mps = 0.3;
  double bell_width_mps = 0.1;
  double bell_amplitude_mT = 1.0;
  // plates and crosses: smoothstep ramp, held beyond its end
  double ramp_start_mps = 0.5;
  double ramp_end_mps = 0.7;
  double ramp_amplitude_mT = 1.5;

  void validate() const;
  // Tone amplitude in mT. Zero at v = 0 and never negative.
  double envelope_mT(WhiskerShape shape, double speed_mps) const;
};

// Cylinder diameter for rods, sheet thickness for plates and crosses.
double shedding_length_m(const WhiskerSpec& spec);
double shedding_frequency_hz(const WhiskerSpec& spec, double speed_mps, double strouhal);

struct SynthesisOptions {
  double sample_rate_hz = 100.0;
  double noise_sigma_lsb = 0.0;
  std::uint64_t seed = 0;
  double fluid_density = kFreshWaterDensity;
  VivConfig viv;
};

struct TraceRow {
  double t_s = 0.0;
  double speed_mps = 0.0;  // truth
  double theta_deg = 0.0;  // truth
  SensorReading reading;
};

struct SimTrace {
  double sample_rate_hz = 100.0;
  std::vector<TraceRow> rows;
  std::uint64_t seed = 0;
  double noise_sigma_lsb = 0.0;
  double fluid_density = kFreshWaterDensity;
  VivConfig viv;
  std::string design_fingerprint;
  std::vector<std::string> warnings;  // e.g. shedding above Nyquist
};

// Same inputs and seed give a bit-identical trace.
SimTrace synthesize(const SensorModel& model, const VelocityProfile& profile, const SynthesisOptions& options);

struct EstimatorConfig {
  std::size_t window_samples = 10;
  double orientation_floor_lsb = 2.0;
  // Set: apply this calibration. Unset: invert the physical model.
  std::optional<CalibrationModel> calibration;
};

struct StreamEstimate {
  double t_s = 0.0;
  double speed_mps = 0.0;
  std::optional<double> theta_deg;  // only above the orientation floor
  bool saturated = false;
  bool valid = false;  // window filled
};

// Trailing moving average of the counts, then per-sample estimation.
// Throws ConfigError for a zero window and DataError when timestamps do
// not increase.
std::vector<StreamEstimate> estimate_stream(const SimTrace& trace, const SensorModel& model,
                                            const EstimatorConfig& config);

struct StreamScore {
  double speed_rmse_mps = 0.0;
  std::size_t speed_samples = 0;
  std::optional<double> theta_rmse_deg;  // wrapped differences
  std::size_t theta_samples = 0;
};

// Over valid estimates only. Throws EmptyOverlap when none line up with
// the trace and DataError when the series are misaligned.
StreamScore score(std::span<const StreamEstimate> estimates, const SimTrace& trace);

// Bench-style calibration data from the model: `count` speeds along +x
// spaced up to 0.9 v_max, and `count` directions spread over the circle at
// half v_max. Noise (LSB) is added before quantization.
CalibrationSamples synthesize_calibration(const SensorModel& model, std::size_t count, double noise_sigma_lsb,
                                          std::uint64_t seed, double fluid_density = kFreshWaterDensity);

// Signed difference a - b wrapped into [-180, 180).
double angle_difference_deg(double a_deg, double b_deg);

}  // namespace whisker
