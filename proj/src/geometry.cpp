#include "whisker/geometry.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "whisker/errors.hpp"

namespace whisker {

std::string_view to_string(WhiskerShape shape) {
  switch (shape) {
    case WhiskerShape::Rod:
      return "rod";
    case WhiskerShape::Plate:
      return "plate";
    case WhiskerShape::Cross:
      return "cross";
  }
  return "unknown";
}

std::optional<WhiskerShape> shape_from_string(std::string_view name) {
  if (name == "rod") return WhiskerShape::Rod;
  if (name == "plate") return WhiskerShape::Plate;
  if (name == "cross") return WhiskerShape::Cross;
  return std::nullopt;
}

double default_drag_coefficient(WhiskerShape shape) {
  return shape == WhiskerShape::Rod ? 1.1 : 1.32;
}

void WhiskerSpec::validate() const {
  auto positive = [](double value, const char* name) {
    if (!(std::isfinite(value) && value > 0.0)) {
      throw InvalidGeometry(fmt::format("whisker {} must be positive and finite (got {})", name, value));
    }
  };
  positive(height_m, "height");
  positive(width_m, "width");
  positive(thickness_m, "thickness");
  positive(drag_coefficient, "drag coefficient");
  if (!(std::isfinite(stem_height_m) && stem_height_m >= 0.0)) {
    throw InvalidGeometry(fmt::format("whisker stem height must be >= 0 (got {})", stem_height_m));
  }
  if (shape == WhiskerShape::Rod && width_m != thickness_m) {
    throw InvalidGeometry("rod whisker width and thickness must both equal the diameter");
  }
}

WhiskerSpec WhiskerSpec::rod(double diameter_m, double height_m) {
  return {WhiskerShape::Rod, height_m, diameter_m, diameter_m,
          default_drag_coefficient(WhiskerShape::Rod), kDefaultStemHeight};
}

WhiskerSpec WhiskerSpec::plate(double width_m, double height_m, double thickness_m) {
  return {WhiskerShape::Plate, height_m, width_m, thickness_m,
          default_drag_coefficient(WhiskerShape::Plate), kDefaultStemHeight};
}

WhiskerSpec WhiskerSpec::cross(double width_m, double height_m, double thickness_m) {
  return {WhiskerShape::Cross, height_m, width_m, thickness_m,
          default_drag_coefficient(WhiskerShape::Cross), kDefaultStemHeight};
}

void FlowState::validate() const {
  if (!(std::isfinite(speed_mps) && speed_mps >= 0.0)) {
    throw std::invalid_argument(fmt::format("flow speed must be >= 0 (got {})", speed_mps));
  }
  if (!std::isfinite(direction_deg)) {
    throw std::invalid_argument("flow direction must be finite");
  }
  if (!(std::isfinite(fluid_density) && fluid_density > 0.0)) {
    throw std::invalid_argument(fmt::format("fluid density must be positive (got {})", fluid_density));
  }
}

double normalize_degrees(double deg) {
  double wrapped = std::fmod(deg, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  // fmod of a tiny negative number can land exactly on 360
  return wrapped >= 360.0 ? 0.0 : wrapped;
}

std::pair<double, double> unit_direction(double deg) {
  const double wrapped = normalize_degrees(deg);
  if (wrapped == 0.0) return {1.0, 0.0};
  if (wrapped == 90.0) return {0.0, 1.0};
  if (wrapped == 180.0) return {-1.0, 0.0};
  if (wrapped == 270.0) return {0.0, -1.0};
  const double rad = wrapped * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

namespace {

void check_immersion(const WhiskerSpec& spec, const ImmersionConfig& immersion) {
  spec.validate();
  if (!(std::isfinite(immersion.depth_m) && immersion.depth_m > 0.0)) {
    throw InvalidGeometry(fmt::format("immersion depth must be positive (got {})", immersion.depth_m));
  }
  if (immersion.depth_m > spec.height_m) {
    throw InvalidGeometry(fmt::format("immersion depth {} m exceeds drag element height {} m",
                                      immersion.depth_m, spec.height_m));
  }
}

}  // namespace

FrontalAreas frontal_areas(const WhiskerSpec& spec, const ImmersionConfig& immersion) {
  check_immersion(spec, immersion);
  const double depth = immersion.depth_m;
  switch (spec.shape) {
    case WhiskerShape::Rod:
      return {spec.width_m * depth, spec.width_m * depth};
    case WhiskerShape::Plate:
      return {spec.width_m * depth, spec.thickness_m * depth};
    case WhiskerShape::Cross: {
      // one plate face-on plus the other edge-on; the t x t core overlap is ignored
      const double area = (spec.width_m + spec.thickness_m) * depth;
      return {area, area};
    }
  }
  throw InvalidGeometry("unsupported whisker shape");
}

double projected_area(const WhiskerSpec& spec, const ImmersionConfig& immersion, double direction_deg) {
  if (!std::isfinite(direction_deg)) {
    throw std::invalid_argument("flow direction must be finite");
  }
  const FrontalAreas areas = frontal_areas(spec, immersion);
  // a circular section presents the same silhouette from every direction
  if (spec.shape == WhiskerShape::Rod) return areas.along_x_m2;
  const auto [c, s] = unit_direction(direction_deg);
  return areas.along_x_m2 * std::abs(c) + areas.along_y_m2 * std::abs(s);
}

double drag_force(const WhiskerSpec& spec, const FlowState& flow, const ImmersionConfig& immersion) {
  flow.validate();
  const double area = projected_area(spec, immersion, flow.direction_deg);
  return 0.5 * spec.drag_coefficient * flow.fluid_density * flow.speed_mps * flow.speed_mps * area;
}

double moment_arm(const WhiskerSpec& spec, const ImmersionConfig& immersion) {
  check_immersion(spec, immersion);
  return spec.stem_height_m + spec.height_m - 0.5 * immersion.depth_m;
}

double drag_moment(const WhiskerSpec& spec, const FlowState& flow, const ImmersionConfig& immersion) {
  return drag_force(spec, flow, immersion) * moment_arm(spec, immersion);
}

double drag_moment_coefficient(const WhiskerSpec& spec, const ImmersionConfig& immersion,
                               double direction_deg, double fluid_density) {
  if (!(std::isfinite(fluid_density) && fluid_density > 0.0)) {
    throw std::invalid_argument("fluid density must be positive");
  }
  return 0.5 * spec.drag_coefficient * fluid_density * projected_area(spec, immersion, direction_deg) *
         moment_arm(spec, immersion);
}

const std::vector<WhiskerPreset>& whisker_presets() {
  static const std::vector<WhiskerPreset> presets = [] {
    std::vector<WhiskerPreset> out;
    struct Row {
      const char* name;
      WhiskerShape shape;
      double height_mm;
      double width_mm;
    };
    constexpr Row rows[] = {
        {"Cross1", WhiskerShape::Cross, 30, 5},   {"Cross2", WhiskerShape::Cross, 20, 7.5},
        {"Cross3", WhiskerShape::Cross, 15, 10},  {"Plate1", WhiskerShape::Plate, 30, 5},
        {"Plate2", WhiskerShape::Plate, 20, 7.5}, {"Plate3", WhiskerShape::Plate, 15, 10},
        {"Rod1", WhiskerShape::Rod, 60, 1},       {"Rod2", WhiskerShape::Rod, 60, 2},
        {"Rod3", WhiskerShape::Rod, 60, 3},
    };
    for (const Row& row : rows) {
      const double h = row.height_mm * 1e-3;
      const double w = row.width_mm * 1e-3;
      WhiskerPreset preset{row.name, {}, {}};
      switch (row.shape) {
        case WhiskerShape::Rod:
          preset.spec = WhiskerSpec::rod(w, h);
          preset.immersion.depth_m = 30e-3;
          break;
        case WhiskerShape::Plate:
          preset.spec = WhiskerSpec::plate(w, h);
          preset.immersion.depth_m = h;
          break;
        case WhiskerShape::Cross:
          preset.spec = WhiskerSpec::cross(w, h);
          preset.immersion.depth_m = h;
          break;
      }
      out.push_back(preset);
    }
    return out;
  }();
  return presets;
}

std::optional<WhiskerPreset> find_preset(std::string_view name) {
  for (const auto& preset : whisker_presets()) {
    if (preset.name == name) return preset;
  }
  return std::nullopt;
}

}  // namespace whisker
