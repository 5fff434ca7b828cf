#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "quantization_bound.hpp"
#include "whisker/errors.hpp"
#include "whisker/sensor_model.hpp"

using namespace whisker;

namespace {

SensorDesign preset_design(const WhiskerPreset& p) {
  SensorDesign d = SensorDesign::reference();
  d.whisker = p.spec;
  d.immersion = p.immersion;
  return d;
}

double wrapped(double deg) { return std::abs(std::remainder(deg, 360.0)); }

}  // namespace

TEST(Forward, ZeroFlowReadsZero) {
  const SensorModel model(SensorDesign::reference());
  for (double theta : {0.0, 45.0, 300.0}) {
    const ForwardResult r = model.forward({0.0, theta, 1000.0});
    EXPECT_EQ(r.reading.bx, 0);
    EXPECT_EQ(r.reading.by, 0);
    EXPECT_EQ(r.reading.bz, 0);
    EXPECT_FALSE(r.reading.saturated);
    EXPECT_FALSE(r.deflection.saturated);
  }
}

TEST(Forward, ReferenceChain) {
  const SensorModel model(SensorDesign::reference());
  const ForwardResult r = model.forward({0.5, 0.0, 1000.0});
  EXPECT_NEAR(r.drag_force_N, 1.2375e-2, 1e-12);
  EXPECT_NEAR(r.moment_arm_m, 0.050, 1e-15);
  EXPECT_NEAR(r.drag_moment_Nm, 6.1875e-4, 1e-15);
  EXPECT_NEAR(r.deflection.phi_rad, 6.1875e-4 / 3.47e-3, 1e-12);
  EXPECT_GT(r.reading.bx, 0);
  EXPECT_EQ(r.reading.by, 0);
}

TEST(Forward, DoublingSpeedRoughlyQuadruplesField) {
  for (const auto& p : whisker_presets()) {
    const SensorModel model(preset_design(p));
    for (double v = 0.05; v <= 0.35 + 1e-12; v += 0.05) {
      if (2.0 * v >= model.max_speed(0.0)) continue;
      const double ratio = model.magnitude_lsb(2.0 * v, 0.0) / model.magnitude_lsb(v, 0.0);
      EXPECT_GE(ratio, 3.6) << p.name << " v=" << v;
      EXPECT_LE(ratio, 4.4) << p.name << " v=" << v;
    }
  }
}

TEST(Forward, SaturatedReadingIsConstant) {
  for (const auto& p : whisker_presets()) {
    const SensorModel model(preset_design(p));
    for (double theta : {0.0, 30.0, 90.0}) {
      const double v_max = model.max_speed(theta);
      const ForwardResult at = model.forward({v_max, theta, 1000.0});
      for (double f : {1.01, 1.2, 3.0}) {
        const ForwardResult beyond = model.forward({f * v_max, theta, 1000.0});
        EXPECT_TRUE(beyond.deflection.saturated);
        EXPECT_EQ(beyond.reading.bx, at.reading.bx) << p.name;
        EXPECT_EQ(beyond.reading.by, at.reading.by) << p.name;
        EXPECT_EQ(beyond.reading.bz, at.reading.bz) << p.name;
      }
    }
  }
}

TEST(Forward, RateMatchesFiniteDifference) {
  const SensorModel model(SensorDesign::reference());
  for (double v : {0.1, 0.3, 0.553, 0.65}) {
    const double h = 1e-5;
    const double fd = (model.magnitude_lsb(v + h, 20.0) - model.magnitude_lsb(v - h, 20.0)) / (2 * h);
    EXPECT_NEAR(model.magnitude_rate_lsb(v, 20.0), fd, 1e-5 * fd);
  }
}

TEST(Inverse, RoundTripWithinQuantizationBound) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& p : whisker_presets()) {
    const SensorModel model(preset_design(p));
    for (int k = 0; k < 100; ++k) {
      const double theta = 360.0 * u(rng);
      const double v_max = model.max_speed(theta);
      const double v = 0.05 + (0.9 * v_max - 0.05) * u(rng);
      const ForwardResult r = model.forward({v, theta, 1000.0});
      const SpeedEstimate est = model.invert_speed(r.reading);
      const double bound = oracle::speed_quantization_bound(model, v, theta);
      EXPECT_LE(std::abs(est.speed_mps - v), bound) << p.name << " v=" << v << " theta=" << theta;
      EXPECT_FALSE(est.saturated);
    }
  }
}

TEST(Inverse, BoundReducesToSlopeRuleForRodsAtMidRange) {
  // rods have no direction dependence in drag, so away from zero the
  // bound is about sqrt(1/2) LSB over the local slope
  const SensorModel model(SensorDesign::reference());
  for (double v : {0.3, 0.5}) {
    const double slope_rule = std::sqrt(0.5) / model.magnitude_rate_lsb(v, 0.0);
    const double bound = oracle::speed_quantization_bound(model, v, 0.0, 0.0);
    EXPECT_GT(bound, 0.9 * slope_rule);
    EXPECT_LT(bound, 1.5 * slope_rule);
  }
}

TEST(Inverse, OrientationOfTheFieldWithinOneDegree) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& p : whisker_presets()) {
    if (p.spec.shape != WhiskerShape::Rod) continue;
    const SensorModel model(preset_design(p));
    for (int k = 0; k < 100; ++k) {
      const double theta = 360.0 * u(rng);
      const double v = 0.05 + (0.9 * model.max_speed(theta) - 0.05) * u(rng);
      const ForwardResult r = model.forward({v, theta, 1000.0});
      EXPECT_LE(wrapped(invert_orientation(r.delta.bx_mT, r.delta.by_mT) - theta), 1.0);
      // the quantized direction is off by at most the angle subtended by
      // the rounding box
      const double m = r.delta.magnitude_xy() * model.design().hall.sensitivity_lsb_per_mT;
      if (m > 1.0) {
        const double q = std::asin(std::min(1.0, std::sqrt(0.5) / m)) * 180.0 / std::numbers::pi;
        EXPECT_LE(wrapped(invert_orientation(r.reading) - theta), q + 1.0);
      }
    }
  }
}

TEST(Inverse, OrientationExamples) {
  EXPECT_NEAR(invert_orientation(10.0, 0.0), 0.0, 1e-12);
  EXPECT_NEAR(invert_orientation(0.0, 10.0), 90.0, 1e-12);
  EXPECT_NEAR(invert_orientation(-10.0, 0.0), 180.0, 1e-12);
  EXPECT_NEAR(invert_orientation(0.0, -10.0), 270.0, 1e-12);
  EXPECT_NEAR(invert_orientation(5.0, 5.0), 45.0, 1e-12);
  EXPECT_THROW(invert_orientation(0.0, 0.0), UndefinedOrientation);
}

TEST(Inverse, ZeroReadingGivesZeroSpeed) {
  const SensorModel model(SensorDesign::reference());
  const SpeedEstimate est = model.invert_speed(SensorReading{});
  EXPECT_EQ(est.speed_mps, 0.0);
  EXPECT_FALSE(est.saturated);
}

TEST(Inverse, SaturatedAndUnreachableReadings) {
  const SensorModel model(SensorDesign::reference());
  const ForwardResult sat = model.forward({2.0, 0.0, 1000.0});
  const SpeedEstimate est = model.invert_speed(sat.reading);
  EXPECT_TRUE(est.saturated);
  EXPECT_NEAR(est.speed_mps, model.max_speed(0.0), 1e-12);

  SensorReading far = sat.reading;
  far.bx += 50;
  EXPECT_THROW(model.invert_speed(far), UnreachableReading);
  const SpeedEstimate clamped = model.invert_speed_counts(far.bx, far.by);
  EXPECT_TRUE(clamped.saturated);
}

TEST(Inverse, DensityScalingInvariance) {
  // M ~ rho v^2, so doubling rho is the same as scaling v by sqrt(2).
  const SensorModel model(SensorDesign::reference());
  for (double v : {0.1, 0.2, 0.4}) {
    EXPECT_NEAR(model.magnitude_lsb(v, 10.0, 2000.0), model.magnitude_lsb(v * std::sqrt(2.0), 10.0, 1000.0),
                1e-9);
    EXPECT_NEAR(model.max_speed(10.0, 2000.0) * std::sqrt(2.0), model.max_speed(10.0, 1000.0), 1e-12);
  }
}

TEST(Inverse, MaxSpeedOfReferenceRod) {
  const SensorModel model(SensorDesign::reference());
  EXPECT_NEAR(model.max_speed(0.0), 0.69957, 5e-5);
}

TEST(Design, NonMonotoneMagnetPlacementIsRejected) {
  SensorDesign d = SensorDesign::reference();
  d.magnet.pivot_offset_m = 5e-3;
  d.hall.sensor_offset_m = 10e-3;
  EXPECT_THROW(SensorModel{d}, NonMonotoneDesign);
}

TEST(Design, CollisionAndOverlapAreRejected) {
  SensorDesign d = SensorDesign::reference();
  d.hall.sensor_offset_m = 2.2e-3;
  EXPECT_THROW(SensorModel{d}, PoseCollision);
  d.hall.sensor_offset_m = 2.0e-3;
  EXPECT_THROW(SensorModel{d}, ConfigError);
  d = SensorDesign::reference();
  d.immersion.depth_m = 70e-3;
  EXPECT_THROW(SensorModel{d}, InvalidGeometry);
}
