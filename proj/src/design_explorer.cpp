#include "whisker/design_explorer.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "whisker/errors.hpp"

namespace whisker {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double reading_magnitude(const SensorModel& model, double speed_mps, double rho) {
  return model.forward({speed_mps, 0.0, rho}).reading.magnitude_xy();
}

}  // namespace

DesignMetrics metrics(const SensorModel& model, double fluid_density) {
  DesignMetrics out;
  out.v_max_mps = model.max_speed(0.0, fluid_density);
  out.v_mid_mps = model.speed_for_deflection(kMidDeflectionDeg * kDegToRad, 0.0, fluid_density);
  out.sensitivity_point = model.magnitude_rate_lsb(out.v_mid_mps, 0.0, fluid_density) / 1000.0;

  const double high = std::min(kSecantHighMps, out.v_max_mps);
  const double low = out.v_max_mps > kSecantLowMps ? kSecantLowMps : 0.0;
  const double rise = reading_magnitude(model, high, fluid_density) - reading_magnitude(model, low, fluid_density);
  out.sensitivity_secant = rise / ((high - low) * 1000.0);
  return out;
}

DesignMetrics metrics(const SensorDesign& design, double fluid_density) {
  return metrics(SensorModel(design), fluid_density);
}

double finite_difference_sensitivity(const SensorModel& model, double speed_mps, double step_mps,
                                     double fluid_density) {
  const double up = model.magnitude_lsb(speed_mps + step_mps, 0.0, fluid_density);
  const double down = model.magnitude_lsb(speed_mps - step_mps, 0.0, fluid_density);
  return (up - down) / (2.0 * step_mps * 1000.0);
}

namespace {

struct ParameterInfo {
  SweepParameter parameter;
  std::string_view name;
  std::string_view unit;
};

constexpr ParameterInfo kParameters[] = {
    {SweepParameter::DiameterMm, "diameter_mm", "mm"},
    {SweepParameter::DepthMm, "depth_mm", "mm"},
    {SweepParameter::Stiffness, "stiffness_Nm_per_rad", "N m/rad"},
    {SweepParameter::SensorOffsetMm, "sensor_offset_mm", "mm"},
    {SweepParameter::RemanenceT, "remanence_T", "T"},
    {SweepParameter::Preset, "preset", ""},
};

const ParameterInfo& info(SweepParameter parameter) {
  for (const auto& entry : kParameters) {
    if (entry.parameter == parameter) return entry;
  }
  throw std::logic_error("unhandled sweep parameter");
}

double parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value)) {
    throw ConfigError(fmt::format("'{}' is not a number", text));
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string_view to_string(SweepParameter parameter) { return info(parameter).name; }
std::string_view unit_of(SweepParameter parameter) { return info(parameter).unit; }

SweepParameter sweep_parameter_from_string(std::string_view name) {
  for (const auto& entry : kParameters) {
    if (entry.name == name) return entry.parameter;
  }
  std::string known;
  for (const auto& entry : kParameters) known += fmt::format("{}{}", known.empty() ? "" : ", ", entry.name);
  throw UnknownParameter(fmt::format("unknown sweep parameter '{}' (known: {})", name, known));
}

std::size_t SweepAxis::size() const {
  return parameter == SweepParameter::Preset ? names.size() : values.size();
}

std::string SweepAxis::label(std::size_t index) const {
  if (parameter == SweepParameter::Preset) return names.at(index);
  return fmt::format("{}", values.at(index));
}

void SweepAxis::validate() const {
  const std::string_view name = to_string(parameter);
  if (size() == 0) throw ConfigError(fmt::format("sweep axis '{}' has no values", name));
  if (parameter == SweepParameter::Preset) {
    std::set<std::string> seen;
    for (const auto& preset : names) {
      if (!find_preset(preset)) throw ConfigError(fmt::format("unknown preset '{}'", preset));
      if (!seen.insert(preset).second) throw ConfigError(fmt::format("preset '{}' repeated on sweep axis", preset));
    }
    return;
  }
  if (values.size() < 2) return;
  const bool rising = values[1] > values[0];
  for (std::size_t k = 1; k < values.size(); ++k) {
    const bool ok = rising ? values[k] > values[k - 1] : values[k] < values[k - 1];
    if (!ok) throw ConfigError(fmt::format("sweep axis '{}' is not strictly monotone", name));
  }
}

SweepAxis parse_axis(std::string_view text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(fmt::format("sweep axis '{}' must look like parameter=v1,v2,...", text));
  }
  SweepAxis axis;
  axis.parameter = sweep_parameter_from_string(text.substr(0, eq));
  const std::string_view body = text.substr(eq + 1);

  if (axis.parameter == SweepParameter::Preset) {
    for (auto part : split(body, ',')) axis.names.emplace_back(part);
  } else if (body.find(':') != std::string_view::npos) {
    const auto parts = split(body, ':');
    if (parts.size() != 3) throw ConfigError(fmt::format("range '{}' must be start:stop:step", body));
    const double start = parse_number(parts[0]);
    const double stop = parse_number(parts[1]);
    const double step = parse_number(parts[2]);
    if (step == 0.0 || (stop - start) / step < 0.0) {
      throw ConfigError(fmt::format("range '{}' does not reach its end", body));
    }
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 10000) throw ConfigError(fmt::format("range '{}' has too many points", body));
    for (std::size_t k = 0; k < count; ++k) axis.values.push_back(start + static_cast<double>(k) * step);
  } else {
    for (auto part : split(body, ',')) axis.values.push_back(parse_number(part));
  }
  axis.validate();
  return axis;
}

SensorDesign apply_axis_value(const SensorDesign& base, const SweepAxis& axis, std::size_t index) {
  SensorDesign design = base;
  if (axis.parameter == SweepParameter::Preset) {
    const auto preset = find_preset(axis.names.at(index));
    if (!preset) throw ConfigError(fmt::format("unknown preset '{}'", axis.names.at(index)));
    design.whisker = preset->spec;
    design.immersion = preset->immersion;
    return design;
  }
  const double value = axis.values.at(index);
  switch (axis.parameter) {
    case SweepParameter::DiameterMm:
      if (design.whisker.shape != WhiskerShape::Rod) {
        throw InvalidGeometry(fmt::format("diameter applies only to rod whiskers, not {}",
                                          to_string(design.whisker.shape)));
      }
      design.whisker.width_m = design.whisker.thickness_m = value * 1e-3;
      break;
    case SweepParameter::DepthMm:
      design.immersion.depth_m = value * 1e-3;
      break;
    case SweepParameter::Stiffness:
      design.spring.torsional_stiffness = value;
      break;
    case SweepParameter::SensorOffsetMm:
      design.hall.sensor_offset_m = value * 1e-3;
      break;
    case SweepParameter::RemanenceT:
      design.magnet.remanence_T = value;
      break;
    case SweepParameter::Preset:
      break;
  }
  return design;
}

namespace {

SweepCell evaluate_cell(const SensorDesign& base, const SweepAxis& axis1, const std::optional<SweepAxis>& axis2,
                        std::size_t i, std::size_t j, double fluid_density) {
  SweepCell cell;
  cell.i = i;
  cell.j = j;
  try {
    // a preset replaces the whole drag element, so it goes first
    SensorDesign design = base;
    if (axis2 && axis2->parameter == SweepParameter::Preset) {
      design = apply_axis_value(apply_axis_value(design, *axis2, j), axis1, i);
    } else {
      design = apply_axis_value(design, axis1, i);
      if (axis2) design = apply_axis_value(design, *axis2, j);
    }
    cell.metrics = metrics(design, fluid_density);
  } catch (const InvalidGeometry& e) {
    cell.reason = "geometry";
    cell.detail = e.what();
  } catch (const NonMonotoneDesign& e) {
    cell.reason = "non_monotone";
    cell.detail = e.what();
  } catch (const PoseCollision& e) {
    cell.reason = "pose_collision";
    cell.detail = e.what();
  } catch (const std::exception& e) {
    cell.reason = "invalid_config";
    cell.detail = e.what();
  }
  return cell;
}

}  // namespace

SweepGrid sweep(const SensorDesign& base, const SweepAxis& axis1, const std::optional<SweepAxis>& axis2,
                double fluid_density, unsigned workers) {
  axis1.validate();
  if (axis2) {
    axis2->validate();
    if (axis2->parameter == axis1.parameter) {
      throw ConfigError(fmt::format("both sweep axes vary '{}'", to_string(axis1.parameter)));
    }
  }

  SweepGrid grid;
  grid.axis1 = axis1;
  grid.axis2 = axis2;
  const std::size_t columns = grid.columns();
  const std::size_t total = axis1.size() * columns;
  grid.cells.resize(total);

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));

  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      grid.cells[k] = evaluate_cell(base, axis1, axis2, k / columns, k % columns, fluid_density);
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
  }
  return grid;
}

}  // namespace whisker
