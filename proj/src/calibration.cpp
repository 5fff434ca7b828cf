#include "whisker/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "whisker/errors.hpp"
#include "whisker/geometry.hpp"
#include "whisker/sensor_model.hpp"

namespace whisker {

std::optional<double> CalibrationModel::vertex() const {
  if (a >= 0.0) return std::nullopt;
  return -b / (2.0 * a);
}

namespace {

// Coefficient of determination about the mean, clipped to [0, 1]. A
// through-origin fit can score below zero on this scale.
double r_squared(const Eigen::VectorXd& observed, const Eigen::VectorXd& fitted) {
  const double ss_res = (observed - fitted).squaredNorm();
  const double ss_tot = (observed.array() - observed.mean()).matrix().squaredNorm();
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

}  // namespace

CalibrationModel fit_calibration(std::span<const SpeedSample> speed,
                                 std::span<const OrientationSample> orientation) {
  if (speed.size() < 3) {
    throw DegenerateSamples(fmt::format("speed fit needs at least 3 samples (got {})", speed.size()));
  }
  if (orientation.size() < 2) {
    throw DegenerateSamples(
        fmt::format("orientation fit needs at least 2 samples (got {})", orientation.size()));
  }

  const Eigen::Index n = static_cast<Eigen::Index>(speed.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd observed(n);
  double x_min = speed.front().magnitude, x_max = x_min;
  for (Eigen::Index i = 0; i < n; ++i) {
    const SpeedSample& s = speed[static_cast<std::size_t>(i)];
    if (!std::isfinite(s.magnitude) || !std::isfinite(s.speed_mps)) {
      throw DegenerateSamples(fmt::format("speed sample {} is not finite", i));
    }
    design(i, 0) = s.magnitude * s.magnitude;
    design(i, 1) = s.magnitude;
    observed(i) = s.speed_mps;
    x_min = std::min(x_min, s.magnitude);
    x_max = std::max(x_max, s.magnitude);
  }
  if (x_max == x_min) {
    throw DegenerateSamples("speed samples all share one magnitude");
  }
  const auto qr = design.colPivHouseholderQr();
  if (qr.rank() < 2) {
    throw DegenerateSamples("speed samples do not determine a quadratic through the origin");
  }
  const Eigen::Vector2d coefficients = qr.solve(observed);

  CalibrationModel model;
  model.a = coefficients(0);
  model.b = coefficients(1);
  if (!(model.b > 0.0)) {
    throw DegenerateSamples(fmt::format("fitted initial slope {} is not positive", model.b));
  }
  model.r2_speed = r_squared(observed, design * coefficients);
  model.speed_samples = speed.size();

  // theta = c * u through the origin: c = sum(u theta) / sum(u^2)
  const Eigen::Index m = static_cast<Eigen::Index>(orientation.size());
  Eigen::VectorXd angle(m), theta(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const OrientationSample& s = orientation[static_cast<std::size_t>(i)];
    if (!std::isfinite(s.angle_deg) || !std::isfinite(s.theta_deg)) {
      throw DegenerateSamples(fmt::format("orientation sample {} is not finite", i));
    }
    angle(i) = s.angle_deg;
    theta(i) = s.theta_deg;
  }
  const double denom = angle.squaredNorm();
  if (denom == 0.0) {
    throw DegenerateSamples("orientation samples all have a zero angle");
  }
  model.c = angle.dot(theta) / denom;
  model.r2_orientation = r_squared(theta, model.c * angle);
  model.orientation_samples = orientation.size();
  return model;
}

CalibrationModel fit_calibration(const CalibrationSamples& samples) {
  return fit_calibration(samples.speed, samples.orientation);
}

CalibratedEstimate apply_calibration(const CalibrationModel& model, double bx, double by) {
  CalibratedEstimate out;
  const double magnitude = std::hypot(bx, by);
  if (magnitude == 0.0) return out;

  const auto turnover = model.vertex();
  if (turnover && magnitude > *turnover) {
    out.speed_mps = model.speed_at(*turnover);
    out.saturated = true;
  } else {
    out.speed_mps = std::max(0.0, model.speed_at(magnitude));
  }
  out.theta_deg = normalize_degrees(model.c * invert_orientation(bx, by));
  return out;
}

CalibratedEstimate apply_calibration(const CalibrationModel& model, const SensorReading& reading) {
  return apply_calibration(model, static_cast<double>(reading.bx), static_cast<double>(reading.by));
}

nlohmann::json to_json(const CalibrationModel& model) {
  const std::string& unit = model.magnitude_unit;
  return {
      {"kind", "whisker-calibration"},
      {"speed",
       {{"form", "v = a*x^2 + b*x, x = sqrt(bx^2 + by^2)"},
        {"a", model.a},
        {"b", model.b},
        {"r2", model.r2_speed},
        {"samples", model.speed_samples}}},
      {"orientation",
       {{"form", "theta = c * atan2(by, bx)"},
        {"c", model.c},
        {"r2", model.r2_orientation},
        {"samples", model.orientation_samples}}},
      {"units",
       {{"magnitude", unit},
        {"a", "m/s per " + unit + "^2"},
        {"b", "m/s per " + unit},
        {"c", "deg per deg"},
        {"speed", "m/s"},
        {"theta", "deg"}}},
      {"design_fingerprint", model.design_fingerprint},
  };
}

CalibrationModel calibration_from_json(const nlohmann::json& doc) {
  try {
    CalibrationModel model;
    const auto& speed = doc.at("speed");
    const auto& orientation = doc.at("orientation");
    model.a = speed.at("a").get<double>();
    model.b = speed.at("b").get<double>();
    model.r2_speed = speed.value("r2", 0.0);
    model.speed_samples = speed.value("samples", std::size_t{0});
    model.c = orientation.at("c").get<double>();
    model.r2_orientation = orientation.value("r2", 0.0);
    model.orientation_samples = orientation.value("samples", std::size_t{0});
    if (doc.contains("units")) model.magnitude_unit = doc.at("units").value("magnitude", "LSB");
    model.design_fingerprint = doc.value("design_fingerprint", "");
    if (!(model.b > 0.0)) throw ConfigError("calibration speed.b must be positive");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("invalid calibration document: {}", e.what()));
  }
}

}  // namespace whisker
