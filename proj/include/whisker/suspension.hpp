// Lumped torsional-spring model of the four-serpentine suspension with
// mechanical stops.
#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace whisker {

inline constexpr double kDefaultTorsionalStiffness = 3.47e-3;  // N m / rad
inline constexpr double kDefaultMaxDeflectionDeg = 20.0;

enum class SpringModel {
  Linear,  // phi = M / k
  Sine,    // sin(phi) = M / k
};

std::string_view to_string(SpringModel model);
std::optional<SpringModel> spring_model_from_string(std::string_view name);

// Fabricated suspension geometry. Informational only: the stiffness below
// is what the model uses.
struct SpringGeometry {
  std::string material = "Stainless Steel";
  double thickness_m = 100e-6;
  double arm_width_m = 0.25e-3;
  double length_m = 1e-3;
  double pitch_m = 0.41e-3;
  int turns = 6;
};

struct SpringSpec {
  double torsional_stiffness = kDefaultTorsionalStiffness;  // N m / rad
  double max_deflection_rad = kDefaultMaxDeflectionDeg * std::numbers::pi / 180.0;
  SpringModel model = SpringModel::Linear;
  SpringGeometry geometry;

  void validate() const;

  // g(phi) such that M = k * g(phi) in the unclamped regime.
  double moment_shape(double phi_rad) const;
};

struct Deflection {
  double phi_rad = 0.0;
  double theta_deg = 0.0;
  bool saturated = false;
};

// Throws std::invalid_argument on a negative or non-finite moment.
Deflection deflection_from_moment(const SpringSpec& spring, double moment_Nm, double theta_deg);

// (Mx, My) = k sin(phi) (cos theta, sin theta)
std::pair<double, double> moment_components(const Deflection& deflection, const SpringSpec& spring);

}  // namespace whisker
