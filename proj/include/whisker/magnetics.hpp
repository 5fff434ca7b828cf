// Permanent-magnet field at the Hall element and the sensor's digital
// readout.
//
// Frames: the suspension pivot is the origin, the whisker points along +z
// and the magnet and Hall element sit below it on the -z axis. The Hall
// element's x/y axes are parallel to the suspension's x/y axes.
#pragma once

#include <Eigen/Dense>

#include "whisker/suspension.hpp"

namespace whisker {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kMu0 = 4e-7 * 3.14159265358979323846;  // T m / A

struct MagnetSpec {
  double edge_length_m = 2e-3;    // cube edge
  double remanence_T = 1.2;       // magnetization along the magnet's local +z
  double pivot_offset_m = 1.1e-3; // pivot to magnet center, along -z at rest

  void validate() const;
  double volume_m3() const { return edge_length_m * edge_length_m * edge_length_m; }
};

struct HallSpec {
  double sensor_offset_m = 4e-3;  // pivot to sensing element, along -z
  double sensitivity_lsb_per_mT = 5.0;
  double field_range_mT = 230.0;
  double resolution_floor_mT = 0.2;

  void validate() const;
  // Largest representable count magnitude.
  int max_count() const;
};

// Rigid placement of a magnet: world = rotation * local + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

// Field (mT) of a uniformly magnetized cube at a world point (m). The
// magnetization points along the magnet's local +z with magnitude
// remanence / mu0; a negative remanence reverses it. Throws
// PointInsideMagnet for points inside or on the magnet.
Vec3 cuboid_field(const MagnetSpec& magnet, const Vec3& point_m, const Pose& pose);

// d B_i / d x_j in mT/m, world frame.
Mat3 cuboid_field_jacobian(const MagnetSpec& magnet, const Vec3& point_m, const Pose& pose);

// Point-dipole approximation with the same moment as the cube.
Vec3 dipole_field(const MagnetSpec& magnet, const Vec3& point_m, const Pose& pose);

// Change of field at the sensor relative to the undeflected pose (mT).
struct FieldDelta {
  double bx_mT = 0.0;
  double by_mT = 0.0;
  double bz_mT = 0.0;

  double magnitude_xy() const;
};

struct SensorReading {
  double t_s = 0.0;
  int bx = 0;
  int by = 0;
  int bz = 0;
  bool saturated = false;

  double magnitude_xy() const;
};

// Magnet + Hall element pair with the rest-pose field precomputed.
class MagnetAssembly {
 public:
  MagnetAssembly(MagnetSpec magnet, HallSpec hall);

  const MagnetSpec& magnet() const { return magnet_; }
  const HallSpec& hall() const { return hall_; }

  // The magnet swings rigidly about the pivot; its center moves toward
  // theta + 180 deg while the whisker tip moves toward theta.
  Pose pose(const Deflection& deflection) const;
  Vec3 sensor_point() const;
  const Vec3& rest_field() const { return rest_field_; }

  // Lowest z reached by any magnet corner in the given pose.
  double lowest_corner_z(const Deflection& deflection) const;

  // Throws PoseCollision when the magnet would cross the sensor plane.
  FieldDelta field_delta(const Deflection& deflection) const;

  // d(field_delta)/d(phi) in mT/rad, from the analytic field Jacobian.
  Vec3 field_delta_rate(const Deflection& deflection) const;

 private:
  MagnetSpec magnet_;
  HallSpec hall_;
  Vec3 rest_field_;
};

FieldDelta field_delta(const MagnetSpec& magnet, const HallSpec& hall, const Deflection& deflection);

// counts = round(dB * sensitivity), clipped at +-(range * sensitivity).
SensorReading quantize(const FieldDelta& delta, const HallSpec& hall);

}  // namespace whisker
