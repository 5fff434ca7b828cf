#include "whisker/sensor_model.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "whisker/errors.hpp"

namespace whisker {

SensorDesign SensorDesign::reference() {
  SensorDesign design;
  design.whisker = WhiskerSpec::rod(3e-3, 60e-3);
  design.immersion.depth_m = 30e-3;
  return design;
}

SensorModel::SensorModel(SensorDesign design)
    : design_(std::move(design)), magnets_(design_.magnet, design_.hall) {
  design_.whisker.validate();
  design_.spring.validate();
  // throws InvalidGeometry for an immersion outside (0, h]
  moment_arm(design_.whisker, design_.immersion);
  check_reachable_poses();
  check_monotone();
}

void SensorModel::check_reachable_poses() const {
  const double phi_max = design_.spring.max_deflection_rad;
  for (int step = 0; step < 72; ++step) {
    const Deflection extreme{phi_max, 5.0 * step, true};
    if (magnets_.lowest_corner_z(extreme) <= -design_.hall.sensor_offset_m) {
      throw PoseCollision(fmt::format("magnet reaches the sensor plane at the stop (theta = {} deg)",
                                      extreme.theta_deg));
    }
  }
}

void SensorModel::check_monotone() const {
  constexpr int kSamples = 48;
  const double phi_max = design_.spring.max_deflection_rad;
  for (const double theta : {0.0, 45.0}) {
    double previous = 0.0;
    for (int k = 1; k <= kSamples; ++k) {
      const Deflection d{phi_max * k / kSamples, theta, k == kSamples};
      const double magnitude = magnets_.field_delta(d).magnitude_xy();
      if (!(magnitude > previous)) {
        throw NonMonotoneDesign(
            fmt::format("|dB_xy| stops increasing at phi = {:.4f} rad, theta = {} deg", d.phi_rad, theta));
      }
      previous = magnitude;
    }
  }
}

ForwardResult SensorModel::forward(const FlowState& flow) const {
  flow.validate();
  FlowState normalized = flow;
  normalized.direction_deg = normalize_degrees(flow.direction_deg);

  ForwardResult out;
  out.drag_force_N = drag_force(design_.whisker, normalized, design_.immersion);
  out.moment_arm_m = moment_arm(design_.whisker, design_.immersion);
  out.drag_moment_Nm = out.drag_force_N * out.moment_arm_m;
  out.deflection = deflection_from_moment(design_.spring, out.drag_moment_Nm, normalized.direction_deg);
  out.delta = magnets_.field_delta(out.deflection);
  out.reading = quantize(out.delta, design_.hall);
  return out;
}

double SensorModel::moment_coefficient(double theta_deg, double fluid_density) const {
  return drag_moment_coefficient(design_.whisker, design_.immersion, theta_deg, fluid_density);
}

double SensorModel::speed_for_deflection(double phi_rad, double theta_deg, double fluid_density) const {
  const SpringSpec& spring = design_.spring;
  return std::sqrt(spring.torsional_stiffness * spring.moment_shape(phi_rad) /
                   moment_coefficient(theta_deg, fluid_density));
}

double SensorModel::max_speed(double theta_deg, double fluid_density) const {
  return speed_for_deflection(design_.spring.max_deflection_rad, theta_deg, fluid_density);
}

double SensorModel::magnitude_lsb(double speed_mps, double theta_deg, double fluid_density) const {
  const double moment = moment_coefficient(theta_deg, fluid_density) * speed_mps * speed_mps;
  const Deflection d = deflection_from_moment(design_.spring, moment, theta_deg);
  return magnets_.field_delta(d).magnitude_xy() * design_.hall.sensitivity_lsb_per_mT;
}

double SensorModel::magnitude_rate_lsb(double speed_mps, double theta_deg, double fluid_density) const {
  const SpringSpec& spring = design_.spring;
  const double coefficient = moment_coefficient(theta_deg, fluid_density);
  const Deflection d = deflection_from_moment(spring, coefficient * speed_mps * speed_mps, theta_deg);
  if (d.saturated || speed_mps == 0.0) return 0.0;

  // chain: dm/dv = sens * d|dB_xy|/dphi * dphi/dv
  double dphi_dv = 2.0 * coefficient * speed_mps / spring.torsional_stiffness;
  if (spring.model == SpringModel::Sine) dphi_dv /= std::cos(d.phi_rad);

  const FieldDelta delta = magnets_.field_delta(d);
  const Vec3 rate = magnets_.field_delta_rate(d);
  const double magnitude = delta.magnitude_xy();
  const double dmag_dphi = (delta.bx_mT * rate.x() + delta.by_mT * rate.y()) / magnitude;
  return design_.hall.sensitivity_lsb_per_mT * dmag_dphi * dphi_dv;
}

SpeedEstimate SensorModel::invert_speed(const SensorReading& reading, double fluid_density) const {
  return invert(reading.bx, reading.by, fluid_density, Overrange::Throw);
}

SpeedEstimate SensorModel::invert_speed_counts(double bx, double by, double fluid_density) const {
  return invert(bx, by, fluid_density, Overrange::Clamp);
}

SpeedEstimate SensorModel::invert(double bx, double by, double fluid_density, Overrange policy) const {
  const double target = std::hypot(bx, by);
  if (target == 0.0) return {0.0, false};
  const double theta = invert_orientation(bx, by);

  const double v_max = max_speed(theta, fluid_density);
  const double continuous_sat = magnitude_lsb(v_max, theta, fluid_density);
  const double quantized_sat = forward({v_max, theta, fluid_density}).reading.magnitude_xy();
  const double upper = std::max(continuous_sat, quantized_sat);
  const double lower = std::min(continuous_sat, quantized_sat);

  if (target > upper + 1.0) {
    if (policy == Overrange::Throw) {
      throw UnreachableReading(fmt::format(
          "reading magnitude {:.2f} LSB exceeds the saturated output {:.2f} LSB", target, upper));
    }
    return {v_max, true};
  }
  if (target >= lower) return {v_max, true};

  double lo = 0.0;
  double hi = v_max;
  while (hi - lo > 1e-9 * v_max) {
    const double mid = 0.5 * (lo + hi);
    if (magnitude_lsb(mid, theta, fluid_density) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), false};
}

double invert_orientation(double bx, double by) {
  if (bx == 0.0 && by == 0.0) {
    throw UndefinedOrientation("orientation is undefined for a zero reading");
  }
  return normalize_degrees(std::atan2(by, bx) * 180.0 / std::numbers::pi);
}

double invert_orientation(const SensorReading& reading) {
  return invert_orientation(static_cast<double>(reading.bx), static_cast<double>(reading.by));
}

}  // namespace whisker
