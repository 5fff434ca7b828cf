#include "whisker/magnetics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "whisker/errors.hpp"
#include "whisker/geometry.hpp"

namespace whisker {

void MagnetSpec::validate() const {
  if (!(std::isfinite(edge_length_m) && edge_length_m > 0.0)) {
    throw ConfigError(fmt::format("magnet edge length must be positive (got {})", edge_length_m));
  }
  if (!(std::isfinite(remanence_T) && remanence_T > 0.0)) {
    throw ConfigError(fmt::format("magnet remanence must be positive (got {})", remanence_T));
  }
  if (!(std::isfinite(pivot_offset_m) && pivot_offset_m >= 0.5 * edge_length_m)) {
    throw ConfigError(fmt::format("magnet pivot offset {} m is smaller than half the edge length",
                                  pivot_offset_m));
  }
}

void HallSpec::validate() const {
  if (!(std::isfinite(sensitivity_lsb_per_mT) && sensitivity_lsb_per_mT > 0.0)) {
    throw ConfigError("hall sensitivity must be positive");
  }
  if (!(std::isfinite(field_range_mT) && field_range_mT > 0.0)) {
    throw ConfigError("hall field range must be positive");
  }
  if (std::abs(resolution_floor_mT * sensitivity_lsb_per_mT - 1.0) > 1e-9) {
    throw ConfigError(fmt::format("hall resolution floor {} mT must equal 1/sensitivity ({} mT)",
                                  resolution_floor_mT, 1.0 / sensitivity_lsb_per_mT));
  }
  if (!std::isfinite(sensor_offset_m)) {
    throw ConfigError("hall sensor offset must be finite");
  }
}

int HallSpec::max_count() const {
  return static_cast<int>(std::lround(field_range_mT * sensitivity_lsb_per_mT));
}

namespace {

// Field of the two charged faces (z = +-c, surface density +-M) of a
// z-magnetized box with half sizes (a, b, c), in units of M / (4 pi).
// Corner terms are antiderivatives of the Coulomb kernel over a face; the
// logarithms are combined pairwise so that neither side of a face edge
// suffers cancellation.

// ln(v2 + R2) - ln(v1 + R1) for v1 < v2 at fixed w = u^2 + Z^2.
double log_pair(double v1, double v2, double w) {
  const double r1 = std::sqrt(v1 * v1 + w);
  const double r2 = std::sqrt(v2 * v2 + w);
  if (v1 >= 0.0) return std::log((v2 + r2) / (v1 + r1));
  if (v2 < 0.0) return std::log((r1 - v1) / (r2 - v2));
  return std::log((v2 + r2) * (r1 - v1) / w);
}

Vec3 face_field(const Vec3& p, double a, double b, double z0) {
  const double Z = p.z() - z0;
  const double u_hi = p.x() + a, u_lo = p.x() - a;
  const double v_hi = p.y() + b, v_lo = p.y() - b;

  // Hx = -sum_u s_u [ln(v+R)]_{v_lo}^{v_hi}
  const double hx = -(log_pair(v_lo, v_hi, u_hi * u_hi + Z * Z) - log_pair(v_lo, v_hi, u_lo * u_lo + Z * Z));
  const double hy = -(log_pair(u_lo, u_hi, v_hi * v_hi + Z * Z) - log_pair(u_lo, u_hi, v_lo * v_lo + Z * Z));

  double hz = 0.0;
  if (Z != 0.0) {
    const std::array<double, 2> us{u_hi, u_lo};
    const std::array<double, 2> vs{v_hi, v_lo};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double u = us[i], v = vs[j];
        const double r = std::sqrt(u * u + v * v + Z * Z);
        const double sign = (i == j) ? 1.0 : -1.0;
        hz += sign * std::atan(u * v / (Z * r));
      }
    }
  }
  return {hx, hy, hz};
}

// Jacobian of face_field with respect to the query point.
Mat3 face_jacobian(const Vec3& p, double a, double b, double z0) {
  const double Z = p.z() - z0;
  const std::array<double, 2> us{p.x() + a, p.x() - a};
  const std::array<double, 2> vs{p.y() + b, p.y() - b};
  Mat3 jac = Mat3::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double u = us[i], v = vs[j];
      const double sign = (i == j) ? 1.0 : -1.0;
      const double wu = u * u + Z * Z;  // distance^2 to the line along y
      const double wv = v * v + Z * Z;  // distance^2 to the line along x
      const double r = std::sqrt(u * u + v * v + Z * Z);
      // 1/(v+R) and 1/(u+R) without cancellation for negative v, u
      const double inv_vr = v >= 0.0 ? 1.0 / (v + r) : (r - v) / wu;
      const double inv_ur = u >= 0.0 ? 1.0 / (u + r) : (r - u) / wv;

      Mat3 corner;
      corner(0, 0) = -u * inv_vr / r;
      corner(0, 1) = -1.0 / r;
      corner(0, 2) = -Z * inv_vr / r;
      corner(1, 0) = -1.0 / r;
      corner(1, 1) = -v * inv_ur / r;
      corner(1, 2) = -Z * inv_ur / r;
      corner(2, 0) = v * Z / (wu * r);
      corner(2, 1) = u * Z / (wv * r);
      corner(2, 2) = -u * v * (r * r + Z * Z) / (r * wu * wv);
      jac += sign * corner;
    }
  }
  return jac;
}

struct LocalQuery {
  Vec3 point;
  double half;
  double scale;  // remanence / (4 pi) in mT
};

LocalQuery to_local(const MagnetSpec& magnet, const Vec3& point_m, const Pose& pose) {
  if (!(std::isfinite(magnet.edge_length_m) && magnet.edge_length_m > 0.0) ||
      !std::isfinite(magnet.remanence_T)) {
    throw ConfigError("magnet edge length must be positive and remanence finite");
  }
  const Vec3 local = pose.rotation.transpose() * (point_m - pose.translation);
  const double half = 0.5 * magnet.edge_length_m;
  if (std::abs(local.x()) <= half && std::abs(local.y()) <= half && std::abs(local.z()) <= half) {
    throw PointInsideMagnet(fmt::format("query point ({}, {}, {}) m lies inside the magnet", point_m.x(),
                                        point_m.y(), point_m.z()));
  }
  return {local, half, magnet.remanence_T * 1e3 / (4.0 * std::numbers::pi)};
}

}  // namespace

Vec3 cuboid_field(const MagnetSpec& magnet, const Vec3& point_m, const Pose& pose) {
  const LocalQuery q = to_local(magnet, point_m, pose);
  const Vec3 local = q.scale * (face_field(q.point, q.half, q.half, q.half) -
                                face_field(q.point, q.half, q.half, -q.half));
  return pose.rotation * local;
}

Mat3 cuboid_field_jacobian(const MagnetSpec& magnet, const Vec3& point_m, const Pose& pose) {
  const LocalQuery q = to_local(magnet, point_m, pose);
  const Mat3 local = q.scale * (face_jacobian(q.point, q.half, q.half, q.half) -
                                face_jacobian(q.point, q.half, q.half, -q.half));
  return pose.rotation * local * pose.rotation.transpose();
}

Vec3 dipole_field(const MagnetSpec& magnet, const Vec3& point_m, const Pose& pose) {
  // B = mu0/(4 pi) (3 r (m.r) / r^5 - m / r^3) with m = Br V / mu0
  const Vec3 r = point_m - pose.translation;
  const double dist = r.norm();
  if (dist == 0.0) throw PointInsideMagnet("dipole field is singular at the magnet center");
  const Vec3 m_dir = pose.rotation.col(2);
  const Vec3 rhat = r / dist;
  const double scale = magnet.remanence_T * magnet.volume_m3() / (4.0 * std::numbers::pi) * 1e3;
  return scale * (3.0 * rhat * m_dir.dot(rhat) - m_dir) / (dist * dist * dist);
}

double FieldDelta::magnitude_xy() const { return std::hypot(bx_mT, by_mT); }

double SensorReading::magnitude_xy() const {
  return std::hypot(static_cast<double>(bx), static_cast<double>(by));
}

namespace {

// Rest orientation: local +z (magnetization) points at the Hall element.
const Mat3& mount_rotation() {
  static const Mat3 flip = Vec3(1.0, -1.0, -1.0).asDiagonal();
  return flip;
}

// Horizontal axis about which a tilt toward theta is a positive rotation.
Vec3 tilt_axis(double theta_deg) {
  const auto [c, s] = unit_direction(theta_deg);
  return {-s, c, 0.0};
}

Mat3 skew(const Vec3& n) {
  Mat3 k;
  k << 0.0, -n.z(), n.y(), n.z(), 0.0, -n.x(), -n.y(), n.x(), 0.0;
  return k;
}

}  // namespace

MagnetAssembly::MagnetAssembly(MagnetSpec magnet, HallSpec hall) : magnet_(magnet), hall_(hall) {
  magnet_.validate();
  hall_.validate();
  if (!(hall_.sensor_offset_m > magnet_.pivot_offset_m + 0.5 * magnet_.edge_length_m)) {
    throw ConfigError(fmt::format("hall sensor offset {} m must lie beyond the magnet face at {} m",
                                  hall_.sensor_offset_m,
                                  magnet_.pivot_offset_m + 0.5 * magnet_.edge_length_m));
  }
  rest_field_ = cuboid_field(magnet_, sensor_point(), pose(Deflection{}));
}

Vec3 MagnetAssembly::sensor_point() const { return {0.0, 0.0, -hall_.sensor_offset_m}; }

Pose MagnetAssembly::pose(const Deflection& deflection) const {
  const Mat3 tilt = Eigen::AngleAxisd(deflection.phi_rad, tilt_axis(deflection.theta_deg)).toRotationMatrix();
  Pose out;
  out.rotation = tilt * mount_rotation();
  out.translation = tilt * Vec3(0.0, 0.0, -magnet_.pivot_offset_m);
  return out;
}

double MagnetAssembly::lowest_corner_z(const Deflection& deflection) const {
  const Pose p = pose(deflection);
  const double h = 0.5 * magnet_.edge_length_m;
  double lowest = std::numeric_limits<double>::infinity();
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 local((corner & 1) ? h : -h, (corner & 2) ? h : -h, (corner & 4) ? h : -h);
    lowest = std::min(lowest, (p.rotation * local + p.translation).z());
  }
  return lowest;
}

FieldDelta MagnetAssembly::field_delta(const Deflection& deflection) const {
  if (deflection.phi_rad == 0.0) return {};
  if (lowest_corner_z(deflection) <= -hall_.sensor_offset_m) {
    throw PoseCollision(fmt::format("magnet crosses the sensor plane at phi = {} rad, theta = {} deg",
                                    deflection.phi_rad, deflection.theta_deg));
  }
  const Vec3 b = cuboid_field(magnet_, sensor_point(), pose(deflection)) - rest_field_;
  return {b.x(), b.y(), b.z()};
}

Vec3 MagnetAssembly::field_delta_rate(const Deflection& deflection) const {
  // B(phi) = R b(R^T q - p0) with R' = [n]x R, so
  // dB/dphi = [n]x B - R J_local R^T [n]x q = [n]x B - J_world [n]x q.
  const Pose p = pose(deflection);
  const Vec3 q = sensor_point();
  const Mat3 k = skew(tilt_axis(deflection.theta_deg));
  const Vec3 field = cuboid_field(magnet_, q, p);
  const Mat3 jac = cuboid_field_jacobian(magnet_, q, p);
  return k * field - jac * (k * q);
}

FieldDelta field_delta(const MagnetSpec& magnet, const HallSpec& hall, const Deflection& deflection) {
  return MagnetAssembly(magnet, hall).field_delta(deflection);
}

SensorReading quantize(const FieldDelta& delta, const HallSpec& hall) {
  const int limit = hall.max_count();
  SensorReading out;
  auto convert = [&](double mT) {
    const double counts = std::round(mT * hall.sensitivity_lsb_per_mT);
    if (counts > limit) {
      out.saturated = true;
      return limit;
    }
    if (counts < -limit) {
      out.saturated = true;
      return -limit;
    }
    return static_cast<int>(counts);
  };
  out.bx = convert(delta.bx_mT);
  out.by = convert(delta.by_mT);
  out.bz = convert(delta.bz_mT);
  return out;
}

}  // namespace whisker
