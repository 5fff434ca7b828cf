#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "whisker/errors.hpp"
#include "whisker/magnetics.hpp"

using namespace whisker;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
const MagnetSpec kMagnet;
const HallSpec kHall;

Vec3 random_exterior_point(std::mt19937_64& rng, double r_min, double r_max) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec3 dir(n(rng), n(rng), n(rng));
  dir.normalize();
  const double r = r_min + (r_max - r_min) * u(rng);
  return r * dir;
}

}  // namespace

TEST(CuboidField, MatchesSurfaceChargeQuadrature) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 12; ++k) {
    const Vec3 p = random_exterior_point(rng, 1.8e-3, 6e-3);
    const Vec3 ref = oracle::cube_field_quadrature(kMagnet.edge_length_m, kMagnet.remanence_T, p);
    const Vec3 got = cuboid_field(kMagnet, p, Pose{});
    EXPECT_LE((got - ref).norm(), 1e-6 * ref.norm() + 1e-9) << p.transpose();
  }
}

TEST(CuboidField, OnAxisTenMillimetresMatchesDipole) {
  const Vec3 p(0.0, 0.0, 10e-3);
  const Vec3 b = cuboid_field(kMagnet, p, Pose{});
  // (mu0 / 4 pi) 2 m / r^3 with m = Br V / mu0
  const double moment = 1.2 * 8e-9 / oracle::kMu0;
  const double dipole_mT = 1e-7 * 2.0 * moment / 1e-6 * 1e3;
  EXPECT_NEAR(b.z(), dipole_mT, 0.02 * dipole_mT);
  EXPECT_NEAR(b.x(), 0.0, 1e-12);
  EXPECT_NEAR(b.y(), 0.0, 1e-12);
}

TEST(CuboidField, FarFieldAgreesWithDipole) {
  std::mt19937_64 rng(17);
  const double edge = kMagnet.edge_length_m;
  for (int k = 0; k < 1000; ++k) {
    const Vec3 p = random_exterior_point(rng, 5.0 * edge, 40.0 * edge);
    const Vec3 cube = cuboid_field(kMagnet, p, Pose{});
    const Vec3 dip = oracle::dipole(edge, kMagnet.remanence_T, Vec3::UnitZ(), p);
    const double rel = (cube - dip).norm() / dip.norm();
    EXPECT_LE(rel, 0.02) << p.transpose();
    if (p.norm() >= 10.0 * edge) {
      EXPECT_LE(rel, 0.005) << p.transpose();
    }
  }
}

TEST(CuboidField, LibraryDipoleMatchesOracleDipole) {
  std::mt19937_64 rng(2);
  const oracle::Pose pose = oracle::tilted_pose(0.2, 30.0, kMagnet.pivot_offset_m);
  const Pose lib{pose.rotation, pose.translation};
  for (int k = 0; k < 20; ++k) {
    const Vec3 p = random_exterior_point(rng, 10e-3, 30e-3);
    const Vec3 ref = oracle::dipole(kMagnet.edge_length_m, kMagnet.remanence_T, pose.rotation * Vec3::UnitZ(),
                                    p - pose.translation);
    EXPECT_LE((dipole_field(kMagnet, p, lib) - ref).norm(), 1e-9 * ref.norm());
  }
}

TEST(CuboidField, MirrorSymmetryAndSignFlip) {
  std::mt19937_64 rng(9);
  MagnetSpec reversed = kMagnet;
  reversed.remanence_T = -kMagnet.remanence_T;
  for (int k = 0; k < 50; ++k) {
    const Vec3 p = random_exterior_point(rng, 2e-3, 8e-3);
    const Vec3 b = cuboid_field(kMagnet, p, Pose{});
    const Vec3 mirrored = cuboid_field(kMagnet, Vec3(-p.x(), p.y(), p.z()), Pose{});
    EXPECT_NEAR(b.norm(), mirrored.norm(), 1e-10 * b.norm());
    EXPECT_NEAR(mirrored.x(), -b.x(), 1e-10 * b.norm());
    const Vec3 r = cuboid_field(reversed, p, Pose{});
    EXPECT_LE((r + b).norm(), 1e-12 * b.norm());
  }
}

TEST(CuboidField, DivergenceAndCurlVanish) {
  std::mt19937_64 rng(23);
  const double h = 1e-7;
  for (int k = 0; k < 40; ++k) {
    const Vec3 p = random_exterior_point(rng, 1.9e-3, 8e-3);
    Mat3 fd;
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e[j] = h;
      fd.col(j) = (cuboid_field(kMagnet, p + e, Pose{}) - cuboid_field(kMagnet, p - e, Pose{})) / (2.0 * h);
    }
    const double scale = fd.norm();
    EXPECT_LE(std::abs(fd.trace()), 1e-5 * scale) << p.transpose();
    EXPECT_LE((fd - fd.transpose()).norm(), 1e-5 * scale) << p.transpose();
  }
}

TEST(CuboidField, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(29);
  const oracle::Pose op = oracle::tilted_pose(0.25, 60.0, kMagnet.pivot_offset_m);
  const Pose pose{op.rotation, op.translation};
  const double h = 1e-7;
  for (int k = 0; k < 30; ++k) {
    const Vec3 p = pose.translation + random_exterior_point(rng, 2e-3, 7e-3);
    const Mat3 jac = cuboid_field_jacobian(kMagnet, p, pose);
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e[j] = h;
      const Vec3 fd = (cuboid_field(kMagnet, p + e, pose) - cuboid_field(kMagnet, p - e, pose)) / (2.0 * h);
      EXPECT_LE((jac.col(j) - fd).norm(), 1e-5 * jac.norm()) << p.transpose();
    }
  }
}

TEST(CuboidField, RejectsPointsInsideOrOnTheMagnet) {
  EXPECT_THROW(cuboid_field(kMagnet, Vec3(0.0, 0.0, 0.0), Pose{}), PointInsideMagnet);
  EXPECT_THROW(cuboid_field(kMagnet, Vec3(0.5e-3, -0.9e-3, 0.99e-3), Pose{}), PointInsideMagnet);
  EXPECT_THROW(cuboid_field(kMagnet, Vec3(0.0, 0.0, 1e-3), Pose{}), PointInsideMagnet);
  EXPECT_NO_THROW(cuboid_field(kMagnet, Vec3(0.0, 0.0, 1.001e-3), Pose{}));
}

TEST(FieldDelta, ZeroAtRest) {
  const FieldDelta d = field_delta(kMagnet, kHall, Deflection{0.0, 77.0, false});
  EXPECT_EQ(d.bx_mT, 0.0);
  EXPECT_EQ(d.by_mT, 0.0);
  EXPECT_EQ(d.bz_mT, 0.0);
}

TEST(FieldDelta, PlusXDeflectionGivesPositiveBx) {
  for (double phi_deg : {1.0, 5.0, 10.0, 20.0}) {
    const FieldDelta d = field_delta(kMagnet, kHall, {phi_deg * kDeg, 0.0, false});
    EXPECT_GT(d.bx_mT, 0.0);
    EXPECT_EQ(d.by_mT, 0.0);
  }
}

TEST(FieldDelta, MatchesQuadratureOracle) {
  for (const auto& [phi_deg, theta] : std::vector<std::pair<double, double>>{{5, 0}, {12.5, 37}, {20, 210}}) {
    const Vec3 ref = oracle::field_delta(kMagnet.edge_length_m, kMagnet.remanence_T, kMagnet.pivot_offset_m,
                                         kHall.sensor_offset_m, phi_deg * kDeg, theta);
    const FieldDelta d = field_delta(kMagnet, kHall, {phi_deg * kDeg, theta, false});
    EXPECT_NEAR(d.bx_mT, ref.x(), 1e-5 * ref.norm());
    EXPECT_NEAR(d.by_mT, ref.y(), 1e-5 * ref.norm());
    EXPECT_NEAR(d.bz_mT, ref.z(), 1e-5 * ref.norm());
  }
}

TEST(FieldDelta, QuarterTurnEquivariance) {
  for (int k = 1; k <= 20; ++k) {
    const double phi = k * kDeg;
    const FieldDelta d0 = field_delta(kMagnet, kHall, {phi, 0.0, false});
    const FieldDelta d90 = field_delta(kMagnet, kHall, {phi, 90.0, false});
    const FieldDelta d180 = field_delta(kMagnet, kHall, {phi, 180.0, false});
    const FieldDelta d270 = field_delta(kMagnet, kHall, {phi, 270.0, false});
    const double tol = 1e-12 * std::abs(d0.bx_mT);
    EXPECT_NEAR(d90.by_mT, d0.bx_mT, tol);
    EXPECT_NEAR(d90.bx_mT, 0.0, tol);
    EXPECT_NEAR(d180.bx_mT, -d0.bx_mT, tol);
    EXPECT_NEAR(d270.by_mT, -d0.bx_mT, tol);
    EXPECT_NEAR(d90.bz_mT, d0.bz_mT, tol);
  }
}

TEST(FieldDelta, GeneralAnglesRotateTheVectorWithBoundedAnisotropy) {
  // The cube has fourfold, not full rotational, symmetry: the magnitude
  // and direction drift slightly between the axes.
  for (int k = 1; k <= 20; ++k) {
    const double phi = k * kDeg;
    const double ref = field_delta(kMagnet, kHall, {phi, 0.0, false}).magnitude_xy();
    for (double theta = 0.0; theta < 360.0; theta += 7.5) {
      const FieldDelta d = field_delta(kMagnet, kHall, {phi, theta, false});
      EXPECT_NEAR(d.magnitude_xy(), ref, 0.03 * ref);
      const double direction = std::atan2(d.by_mT, d.bx_mT) / kDeg;
      double err = std::fmod(direction - theta + 540.0, 360.0) - 180.0;
      EXPECT_LE(std::abs(err), 1.0) << phi << " " << theta;
    }
  }
}

TEST(FieldDelta, StrictlyMonotoneInDeflection) {
  for (double theta : {0.0, 22.5, 45.0}) {
    double previous = 0.0;
    for (int k = 1; k <= 200; ++k) {
      const double m = field_delta(kMagnet, kHall, {20.0 * kDeg * k / 200.0, theta, false}).magnitude_xy();
      EXPECT_GT(m, previous);
      previous = m;
    }
  }
}

TEST(FieldDelta, RateMatchesFiniteDifference) {
  const MagnetAssembly assembly(kMagnet, kHall);
  for (double theta : {0.0, 30.0, 135.0}) {
    for (double phi_deg : {2.0, 10.0, 18.0}) {
      const double phi = phi_deg * kDeg;
      const double h = 1e-6;
      const FieldDelta up = assembly.field_delta({phi + h, theta, false});
      const FieldDelta down = assembly.field_delta({phi - h, theta, false});
      const Vec3 fd((up.bx_mT - down.bx_mT) / (2 * h), (up.by_mT - down.by_mT) / (2 * h),
                    (up.bz_mT - down.bz_mT) / (2 * h));
      const Vec3 rate = assembly.field_delta_rate({phi, theta, false});
      EXPECT_LE((rate - fd).norm(), 1e-6 * fd.norm());
    }
  }
}

TEST(FieldDelta, RestFieldMatchesOracle) {
  const MagnetAssembly assembly(kMagnet, kHall);
  const oracle::Pose rest = oracle::tilted_pose(0.0, 0.0, kMagnet.pivot_offset_m);
  const Vec3 ref = oracle::posed_field(kMagnet.edge_length_m, kMagnet.remanence_T, rest,
                                       Vec3(0.0, 0.0, -kHall.sensor_offset_m));
  EXPECT_LE((assembly.rest_field() - ref).norm(), 1e-6 * ref.norm());
  // magnetization points at the sensor
  EXPECT_LT(assembly.rest_field().z(), 0.0);
  EXPECT_LT(std::abs(assembly.rest_field().z()), kHall.field_range_mT);
}

TEST(FieldDelta, CollisionWithSensorPlane) {
  HallSpec close = kHall;
  close.sensor_offset_m = 2.2e-3;
  const MagnetAssembly assembly(kMagnet, close);
  EXPECT_NO_THROW(assembly.field_delta({1.0 * kDeg, 0.0, false}));
  EXPECT_THROW(assembly.field_delta({20.0 * kDeg, 0.0, false}), PoseCollision);
}

TEST(Quantize, CountsAndSaturation) {
  EXPECT_EQ(quantize({1.0, 0.0, 0.0}, kHall).bx, 5);
  EXPECT_EQ(quantize({0.09, 0.0, 0.0}, kHall).bx, 0);
  const SensorReading big = quantize({300.0, -300.0, 0.0}, kHall);
  EXPECT_EQ(big.bx, 1150);
  EXPECT_EQ(big.by, -1150);
  EXPECT_TRUE(big.saturated);
  EXPECT_FALSE(quantize({229.0, 0.0, 0.0}, kHall).saturated);
  EXPECT_EQ(kHall.max_count(), 1150);
}

TEST(Quantize, IsOdd) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-260.0, 260.0);
  for (int k = 0; k < 1000; ++k) {
    const FieldDelta d{u(rng), u(rng), u(rng)};
    const SensorReading a = quantize(d, kHall);
    const SensorReading b = quantize({-d.bx_mT, -d.by_mT, -d.bz_mT}, kHall);
    EXPECT_EQ(a.bx, -b.bx);
    EXPECT_EQ(a.by, -b.by);
    EXPECT_EQ(a.bz, -b.bz);
  }
}

TEST(Specs, Validation) {
  HallSpec hall;
  hall.resolution_floor_mT = 0.3;
  EXPECT_THROW(hall.validate(), ConfigError);
  HallSpec inside;
  inside.sensor_offset_m = 2.0e-3;
  EXPECT_THROW(MagnetAssembly(kMagnet, inside), ConfigError);
  MagnetSpec m;
  m.pivot_offset_m = 0.9e-3;
  EXPECT_THROW(m.validate(), ConfigError);
  m = MagnetSpec{};
  m.remanence_T = 0.0;
  EXPECT_THROW(m.validate(), ConfigError);
}
