// Range and sensitivity figures of a design, and dense parameter sweeps
// over them.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "whisker/sensor_model.hpp"

namespace whisker {

inline constexpr double kMidDeflectionDeg = 12.5;
inline constexpr double kSecantLowMps = 0.2;
inline constexpr double kSecantHighMps = 0.7;

struct DesignMetrics {
  double v_mid_mps = 0.0;  // phi = 12.5 deg
  double v_max_mps = 0.0;  // phi at the stop
  // LSB per (mm/s). Point: analytic derivative of the pre-quantization
  // magnitude at v_mid. Secant: quantized readings between 0.2 m/s and
  // min(0.7 m/s, v_max).
  double sensitivity_point = 0.0;
  double sensitivity_secant = 0.0;

  double sensitivity() const { return sensitivity_secant; }
};

// Flow along +x.
DesignMetrics metrics(const SensorModel& model, double fluid_density = kFreshWaterDensity);
DesignMetrics metrics(const SensorDesign& design, double fluid_density = kFreshWaterDensity);

// Central difference of the pre-quantization magnitude, LSB per (mm/s).
double finite_difference_sensitivity(const SensorModel& model, double speed_mps, double step_mps = 1e-3,
                                     double fluid_density = kFreshWaterDensity);

enum class SweepParameter { DiameterMm, DepthMm, Stiffness, SensorOffsetMm, RemanenceT, Preset };

std::string_view to_string(SweepParameter parameter);
std::string_view unit_of(SweepParameter parameter);
// Throws UnknownParameter.
SweepParameter sweep_parameter_from_string(std::string_view name);

struct SweepAxis {
  SweepParameter parameter = SweepParameter::DiameterMm;
  std::vector<double> values;      // numeric axes
  std::vector<std::string> names;  // preset axis

  std::size_t size() const;
  std::string label(std::size_t index) const;
  // Throws ConfigError for an empty axis, a numeric axis that is not
  // strictly monotone, or an unknown or repeated preset name.
  void validate() const;
};

// "parameter=v1,v2,..." or "parameter=start:stop:step".
SweepAxis parse_axis(std::string_view text);

// Base design with one axis value applied. Throws ConfigError when the
// value cannot apply (e.g. a diameter on a plate).
SensorDesign apply_axis_value(const SensorDesign& base, const SweepAxis& axis, std::size_t index);

struct SweepCell {
  std::size_t i = 0;
  std::size_t j = 0;
  std::optional<DesignMetrics> metrics;
  std::string reason;  // empty, geometry, non_monotone, pose_collision or invalid_config
  std::string detail;

  bool valid() const { return metrics.has_value(); }
};

struct SweepGrid {
  SweepAxis axis1;
  std::optional<SweepAxis> axis2;
  std::vector<SweepCell> cells;  // row-major, axis1 outer
  std::string design_fingerprint;

  std::size_t columns() const { return axis2 ? axis2->size() : 1; }
  const SweepCell& at(std::size_t i, std::size_t j = 0) const { return cells[i * columns() + j]; }
};

// Evaluates every cell; failing cells are marked, not thrown. axis2 may
// be omitted for a one-dimensional sweep. Cells are spread over up to `workers`
// threads (0 = hardware concurrency); the output does not depend on it.
SweepGrid sweep(const SensorDesign& base, const SweepAxis& axis1, const std::optional<SweepAxis>& axis2,
                double fluid_density = kFreshWaterDensity, unsigned workers = 0);

}  // namespace whisker
