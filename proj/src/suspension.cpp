#include "whisker/suspension.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "whisker/errors.hpp"
#include "whisker/geometry.hpp"

namespace whisker {

std::string_view to_string(SpringModel model) {
  return model == SpringModel::Linear ? "linear" : "sine";
}

std::optional<SpringModel> spring_model_from_string(std::string_view name) {
  if (name == "linear") return SpringModel::Linear;
  if (name == "sine") return SpringModel::Sine;
  return std::nullopt;
}

void SpringSpec::validate() const {
  if (!(std::isfinite(torsional_stiffness) && torsional_stiffness > 0.0)) {
    throw ConfigError(fmt::format("torsional stiffness must be positive (got {})", torsional_stiffness));
  }
  constexpr double limit = 45.0 * std::numbers::pi / 180.0;
  if (!(std::isfinite(max_deflection_rad) && max_deflection_rad > 0.0 && max_deflection_rad <= limit)) {
    throw ConfigError(
        fmt::format("max deflection must lie in (0, 45] degrees (got {} rad)", max_deflection_rad));
  }
}

double SpringSpec::moment_shape(double phi_rad) const {
  return model == SpringModel::Linear ? phi_rad : std::sin(phi_rad);
}

Deflection deflection_from_moment(const SpringSpec& spring, double moment_Nm, double theta_deg) {
  spring.validate();
  if (!std::isfinite(moment_Nm) || moment_Nm < 0.0) {
    throw std::invalid_argument(fmt::format("drag moment must be >= 0 (got {})", moment_Nm));
  }
  const double ratio = moment_Nm / spring.torsional_stiffness;
  Deflection out;
  out.theta_deg = theta_deg;
  if (ratio >= spring.moment_shape(spring.max_deflection_rad)) {
    out.phi_rad = spring.max_deflection_rad;
    out.saturated = true;
    return out;
  }
  out.phi_rad = spring.model == SpringModel::Linear ? ratio : std::asin(ratio);
  return out;
}

std::pair<double, double> moment_components(const Deflection& deflection, const SpringSpec& spring) {
  const double magnitude = spring.torsional_stiffness * std::sin(deflection.phi_rad);
  const auto [c, s] = unit_direction(deflection.theta_deg);
  return {magnitude * c, magnitude * s};
}

}  // namespace whisker
