// The full flow -> reading chain for one sensor assembly and its numerical
// inverse.
#pragma once

#include "whisker/geometry.hpp"
#include "whisker/magnetics.hpp"
#include "whisker/suspension.hpp"

namespace whisker {

struct SensorDesign {
  WhiskerSpec whisker;
  ImmersionConfig immersion;
  SpringSpec spring;
  MagnetSpec magnet;
  HallSpec hall;

  // Rod3 (3 mm x 60 mm) immersed 30 mm on the default suspension and magnet.
  static SensorDesign reference();
};

struct ForwardResult {
  double drag_force_N = 0.0;
  double moment_arm_m = 0.0;
  double drag_moment_Nm = 0.0;
  Deflection deflection;
  FieldDelta delta;
  SensorReading reading;
};

struct SpeedEstimate {
  double speed_mps = 0.0;
  bool saturated = false;
};

// A validated design. Construction checks every component invariant, that
// the magnet clears the sensor plane at the stop for every direction, and
// that |dB_xy| grows strictly with deflection up to the stop; the field at
// the undeflected pose is computed once and reused.
class SensorModel {
 public:
  explicit SensorModel(SensorDesign design);

  const SensorDesign& design() const { return design_; }
  const MagnetAssembly& magnets() const { return magnets_; }

  ForwardResult forward(const FlowState& flow) const;

  // Drag moment per v^2 along a direction (N m s^2/m^2).
  double moment_coefficient(double theta_deg, double fluid_density = kFreshWaterDensity) const;

  // Closed-form speed at which the suspension reaches phi (no clamp).
  double speed_for_deflection(double phi_rad, double theta_deg,
                              double fluid_density = kFreshWaterDensity) const;
  double max_speed(double theta_deg = 0.0, double fluid_density = kFreshWaterDensity) const;

  // Continuous (pre-quantization) |dB_xy| in LSB and its derivative in
  // LSB per m/s.
  double magnitude_lsb(double speed_mps, double theta_deg,
                       double fluid_density = kFreshWaterDensity) const;
  double magnitude_rate_lsb(double speed_mps, double theta_deg,
                            double fluid_density = kFreshWaterDensity) const;

  // Bisection on the forward magnitude. Throws UnreachableReading when the
  // reading lies more than 1 LSB beyond the saturated output.
  SpeedEstimate invert_speed(const SensorReading& reading,
                             double fluid_density = kFreshWaterDensity) const;

  // Same search on fractional (e.g. averaged) counts. Readings beyond the
  // saturated output are reported as saturated instead of throwing.
  SpeedEstimate invert_speed_counts(double bx, double by,
                                    double fluid_density = kFreshWaterDensity) const;

 private:
  enum class Overrange { Throw, Clamp };
  SpeedEstimate invert(double bx, double by, double fluid_density, Overrange policy) const;
  void check_reachable_poses() const;
  void check_monotone() const;

  SensorDesign design_;
  MagnetAssembly magnets_;
};

// Direction of a reading in [0, 360) degrees. Throws UndefinedOrientation
// for a zero reading.
double invert_orientation(const SensorReading& reading);
double invert_orientation(double bx, double by);

}  // namespace whisker
