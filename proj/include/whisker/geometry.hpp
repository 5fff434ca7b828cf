// Whisker drag-element geometry and the quasi-static drag chain:
// flow speed -> drag force -> moment about the suspension.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace whisker {

inline constexpr double kFreshWaterDensity = 1000.0;  // kg/m^3
inline constexpr double kDefaultStemHeight = 5e-3;     // m
inline constexpr double kSheetThickness = 1.5e-3;      // m, carbon-fiber sheet for plates/crosses

enum class WhiskerShape { Rod, Plate, Cross };

std::string_view to_string(WhiskerShape shape);
std::optional<WhiskerShape> shape_from_string(std::string_view name);

// Default drag coefficient fitted per cross-section shape.
double default_drag_coefficient(WhiskerShape shape);

struct WhiskerSpec {
  WhiskerShape shape = WhiskerShape::Rod;
  double height_m = 60e-3;
  double width_m = 3e-3;      // rod: diameter
  double thickness_m = 3e-3;  // rod: diameter
  double drag_coefficient = 1.1;
  double stem_height_m = kDefaultStemHeight;

  // Throws InvalidGeometry when an invariant is violated.
  void validate() const;

  static WhiskerSpec rod(double diameter_m, double height_m);
  static WhiskerSpec plate(double width_m, double height_m, double thickness_m = kSheetThickness);
  static WhiskerSpec cross(double width_m, double height_m, double thickness_m = kSheetThickness);
};

struct ImmersionConfig {
  double depth_m = 30e-3;
};

struct FlowState {
  double speed_mps = 0.0;
  double direction_deg = 0.0;
  double fluid_density = kFreshWaterDensity;

  void validate() const;
};

// Wraps an angle in degrees into [0, 360).
double normalize_degrees(double deg);

// (cos, sin) of an angle in degrees, exact on the four axes.
std::pair<double, double> unit_direction(double deg);

// Immersed frontal areas seen by flow along +x and along +y (m^2).
struct FrontalAreas {
  double along_x_m2;
  double along_y_m2;
};

FrontalAreas frontal_areas(const WhiskerSpec& spec, const ImmersionConfig& immersion);

// A = Ax0 |cos t| + Ay0 |sin t|. Throws InvalidGeometry when the
// immersion depth is outside (0, h].
double projected_area(const WhiskerSpec& spec, const ImmersionConfig& immersion, double direction_deg);

// 1/2 Cd rho v^2 A
double drag_force(const WhiskerSpec& spec, const FlowState& flow, const ImmersionConfig& immersion);

// Lever arm from the centroid of the immersed load to the suspension.
double moment_arm(const WhiskerSpec& spec, const ImmersionConfig& immersion);

double drag_moment(const WhiskerSpec& spec, const FlowState& flow, const ImmersionConfig& immersion);

// Drag moment per unit v^2 (N m s^2 / m^2): M = coefficient * v^2.
double drag_moment_coefficient(const WhiskerSpec& spec, const ImmersionConfig& immersion,
                               double direction_deg, double fluid_density);

// Built-in drag elements (the fabricated whiskers). Rod presets are
// immersed 30 mm by default; plates and crosses are fully immersed.
struct WhiskerPreset {
  std::string name;
  WhiskerSpec spec;
  ImmersionConfig immersion;
};

const std::vector<WhiskerPreset>& whisker_presets();
std::optional<WhiskerPreset> find_preset(std::string_view name);

}  // namespace whisker
