#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "whisker/calibration.hpp"
#include "whisker/errors.hpp"
#include "whisker/flow_sim.hpp"
#include "whisker/sensor_model.hpp"

using namespace whisker;

namespace {

constexpr double kA = -0.0005;
constexpr double kB = 0.0414;

std::vector<SpeedSample> exact_samples(double a, double b, int n, double x_max) {
  std::vector<SpeedSample> out;
  for (int k = 1; k <= n; ++k) {
    const double x = x_max * k / n;
    out.push_back({x, a * x * x + b * x});
  }
  return out;
}

const std::vector<OrientationSample> kIdentityAngles = {{10.0, 10.0}, {100.0, 100.0}, {250.0, 250.0}};

bool same_significant(double x, double y, int digits) {
  return std::abs(x - y) <= 0.5 * std::pow(10.0, -(digits - 1)) * std::abs(y);
}

}  // namespace

TEST(Fit, RecoversPublishedCoefficientsExactly) {
  const auto speed = exact_samples(kA, kB, 20, 23.68);
  const CalibrationModel m = fit_calibration(speed, kIdentityAngles);
  EXPECT_TRUE(same_significant(m.a, kA, 6)) << m.a;
  EXPECT_TRUE(same_significant(m.b, kB, 6)) << m.b;
  EXPECT_NEAR(m.r2_speed, 1.0, 1e-12);
  EXPECT_NEAR(m.c, 1.0, 1e-12);
  EXPECT_NEAR(m.r2_orientation, 1.0, 1e-12);
  EXPECT_EQ(m.speed_samples, 20u);
  EXPECT_EQ(m.orientation_samples, 3u);
}

TEST(Fit, AgreesWithNormalEquations) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> x, v;
  std::vector<SpeedSample> samples;
  for (int k = 1; k <= 30; ++k) {
    const double xi = 0.8 * k;
    const double vi = kA * xi * xi + kB * xi + noise(rng);
    x.push_back(xi);
    v.push_back(vi);
    samples.push_back({xi, vi});
  }
  const oracle::Quadratic ref = oracle::fit_through_origin(x, v);
  const CalibrationModel m = fit_calibration(samples, kIdentityAngles);
  EXPECT_NEAR(m.a, ref.a, 1e-10);
  EXPECT_NEAR(m.b, ref.b, 1e-9);
  std::vector<double> fitted;
  for (double xi : x) fitted.push_back(ref.a * xi * xi + ref.b * xi);
  EXPECT_NEAR(m.r2_speed, oracle::r_squared(v, fitted), 1e-9);
}

TEST(Fit, OrientationSlope) {
  const std::vector<OrientationSample> s = {{10.0, 9.44}, {100.0, 94.4}, {200.0, 188.8}};
  const CalibrationModel m = fit_calibration(exact_samples(kA, kB, 5, 20.0), s);
  EXPECT_NEAR(m.c, 0.944, 1e-12);
}

TEST(Fit, DegenerateInputs) {
  const auto good = exact_samples(kA, kB, 5, 20.0);
  EXPECT_THROW(fit_calibration(std::span(good).first(2), kIdentityAngles), DegenerateSamples);
  EXPECT_THROW(fit_calibration(good, std::span(kIdentityAngles).first(1)), DegenerateSamples);
  const std::vector<SpeedSample> same = {{5.0, 0.2}, {5.0, 0.2}, {5.0, 0.21}};
  EXPECT_THROW(fit_calibration(same, kIdentityAngles), DegenerateSamples);
  const std::vector<SpeedSample> falling = {{1.0, -0.1}, {2.0, -0.2}, {3.0, -0.3}};
  EXPECT_THROW(fit_calibration(falling, kIdentityAngles), DegenerateSamples);
  std::vector<SpeedSample> nan = good;
  nan[1].speed_mps = std::nan("");
  EXPECT_THROW(fit_calibration(nan, kIdentityAngles), DegenerateSamples);
  const std::vector<OrientationSample> zeros = {{0.0, 0.0}, {0.0, 5.0}};
  EXPECT_THROW(fit_calibration(good, zeros), DegenerateSamples);
}

TEST(Apply, PublishedCurveExamples) {
  CalibrationModel m;
  m.a = kA;
  m.b = kB;
  m.c = 0.944;
  ASSERT_TRUE(m.vertex());
  EXPECT_NEAR(*m.vertex(), 41.4, 1e-12);
  EXPECT_NEAR(m.speed_at(23.68), 0.700, 5e-4);
  EXPECT_NEAR(apply_calibration(m, 10.0, 0.0).speed_mps, 0.364, 1e-12);
  EXPECT_NEAR(*apply_calibration(m, 0.0, 10.0).theta_deg, 0.944 * 90.0, 1e-12);
  EXPECT_NEAR(m.c * 100.0, 94.4, 1e-12);
}

TEST(Apply, HoldsBeyondTheVertex) {
  CalibrationModel m;
  m.a = kA;
  m.b = kB;
  const double peak = m.speed_at(41.4);
  for (double x : {41.5, 60.0, 500.0}) {
    const CalibratedEstimate e = apply_calibration(m, x, 0.0);
    EXPECT_TRUE(e.saturated);
    EXPECT_DOUBLE_EQ(e.speed_mps, peak);
  }
  EXPECT_FALSE(apply_calibration(m, 41.3, 0.0).saturated);
}

TEST(Apply, MonotoneUpToTheVertexAndZeroAtRest) {
  CalibrationModel m;
  m.a = kA;
  m.b = kB;
  const CalibratedEstimate zero = apply_calibration(m, 0.0, 0.0);
  EXPECT_EQ(zero.speed_mps, 0.0);
  EXPECT_FALSE(zero.theta_deg);
  double previous = 0.0;
  for (double x = 0.5; x < 41.4; x += 0.5) {
    const double v = apply_calibration(m, x * 0.6, x * 0.8).speed_mps;
    EXPECT_GT(v, previous);
    previous = v;
  }
}

TEST(Json, RoundTrip) {
  CalibrationModel m = fit_calibration(exact_samples(kA, kB, 8, 20.0), kIdentityAngles);
  m.design_fingerprint = "abc123";
  const CalibrationModel back = calibration_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(back.a, m.a);
  EXPECT_EQ(back.b, m.b);
  EXPECT_EQ(back.c, m.c);
  EXPECT_EQ(back.r2_speed, m.r2_speed);
  EXPECT_EQ(back.speed_samples, m.speed_samples);
  EXPECT_EQ(back.magnitude_unit, "LSB");
  EXPECT_EQ(back.design_fingerprint, "abc123");
  EXPECT_EQ(to_json(m)["units"]["b"], "m/s per LSB");
}

TEST(Json, RejectsBrokenDocuments) {
  EXPECT_THROW(calibration_from_json(nlohmann::json::object()), ConfigError);
  auto doc = to_json(fit_calibration(exact_samples(kA, kB, 8, 20.0), kIdentityAngles));
  doc["speed"]["a"] = "x";
  EXPECT_THROW(calibration_from_json(doc), ConfigError);
  doc = to_json(fit_calibration(exact_samples(kA, kB, 8, 20.0), kIdentityAngles));
  doc["speed"]["b"] = -1.0;
  EXPECT_THROW(calibration_from_json(doc), ConfigError);
}

TEST(ModelSamples, SquareRootLawLimitsTheQuadraticFit) {
  // reading ~ v^2 means v ~ sqrt(x); a quadratic through the origin in x
  // cannot follow sqrt near zero. Compare against the ideal sqrt law on
  // the same abscissae.
  const SensorModel model(SensorDesign::reference());
  const CalibrationSamples samples = synthesize_calibration(model, 20, 0.0, 1);
  const CalibrationModel m = fit_calibration(samples);

  std::vector<double> x, v, fitted;
  const double x_top = samples.speed.back().magnitude;
  const double v_top = samples.speed.back().speed_mps;
  for (const SpeedSample& s : samples.speed) {
    x.push_back(s.magnitude);
    v.push_back(v_top * std::sqrt(s.magnitude / x_top));
  }
  const oracle::Quadratic ideal = oracle::fit_through_origin(x, v);
  for (double xi : x) fitted.push_back(ideal.a * xi * xi + ideal.b * xi);
  EXPECT_NEAR(m.r2_speed, oracle::r_squared(v, fitted), 0.02);
  EXPECT_GT(m.r2_speed, 0.9);
  EXPECT_LT(m.r2_speed, 0.995);

  EXPECT_NEAR(m.c, 1.0, 0.01);
  EXPECT_GT(m.r2_orientation, 0.999);
  EXPECT_LT(m.a, 0.0);
  EXPECT_GT(m.b, 0.0);
}
