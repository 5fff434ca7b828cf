// Empirical calibration: speed as a quadratic through the origin in the
// two-axis field magnitude, orientation as a line through the origin in
// the reading's four-quadrant angle.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "whisker/magnetics.hpp"

namespace whisker {

struct SpeedSample {
  double magnitude;  // |dB_xy|, in the model's magnitude unit
  double speed_mps;
};

struct OrientationSample {
  double angle_deg;  // atan2(by, bx) in [0, 360)
  double theta_deg;
};

struct CalibrationModel {
  double a = 0.0;  // m/s per unit^2
  double b = 0.0;  // m/s per unit
  double c = 1.0;  // deg per deg
  double r2_speed = 0.0;
  double r2_orientation = 0.0;
  std::size_t speed_samples = 0;
  std::size_t orientation_samples = 0;
  std::string magnitude_unit = "LSB";
  std::string design_fingerprint;

  double speed_at(double magnitude) const { return a * magnitude * magnitude + b * magnitude; }
  // Magnitude where the fitted curve turns over; none when a >= 0.
  std::optional<double> vertex() const;
};

struct CalibrationSamples {
  std::vector<SpeedSample> speed;
  std::vector<OrientationSample> orientation;
};

// Throws DegenerateSamples when fewer than 3 speed samples or 2 orientation
// samples are given, the magnitudes do not span a range, or the fitted
// initial slope is not positive.
CalibrationModel fit_calibration(std::span<const SpeedSample> speed,
                                 std::span<const OrientationSample> orientation);
CalibrationModel fit_calibration(const CalibrationSamples& samples);

struct CalibratedEstimate {
  double speed_mps = 0.0;
  bool saturated = false;                // magnitude beyond the curve's vertex
  std::optional<double> theta_deg;       // none for a zero reading
};

CalibratedEstimate apply_calibration(const CalibrationModel& model, double bx, double by);
CalibratedEstimate apply_calibration(const CalibrationModel& model, const SensorReading& reading);

nlohmann::json to_json(const CalibrationModel& model);
CalibrationModel calibration_from_json(const nlohmann::json& doc);

}  // namespace whisker
