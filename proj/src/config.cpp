#include "whisker/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "whisker/errors.hpp"

namespace whisker {

namespace {

using nlohmann::json;

constexpr double kMm = 1e-3;
constexpr double kDeg = std::numbers::pi / 180.0;

// One JSON object whose keys must all be consumed.
class Section {
 public:
  Section(const json& doc, std::string path, std::set<std::string> allowed)
      : doc_(doc), path_(std::move(path)), allowed_(std::move(allowed)) {
    if (!doc_.is_object()) throw ConfigError(fmt::format("'{}' must be an object", path_));
    for (const auto& item : doc_.items()) {
      if (!allowed_.count(item.key())) {
        throw ConfigError(fmt::format("unknown key '{}'", key(item.key())));
      }
    }
  }

  bool has(const std::string& name) const { return doc_.contains(name); }

  std::optional<double> number(const std::string& name) const {
    if (!has(name)) return std::nullopt;
    const json& v = doc_.at(name);
    if (!v.is_number()) throw ConfigError(fmt::format("key '{}' must be a number", key(name)));
    const double value = v.get<double>();
    if (!std::isfinite(value)) throw ConfigError(fmt::format("key '{}' must be finite", key(name)));
    return value;
  }

  double number_or(const std::string& name, double fallback) const { return number(name).value_or(fallback); }

  double required_number(const std::string& name) const {
    const auto value = number(name);
    if (!value) throw ConfigError(fmt::format("missing key '{}'", key(name)));
    return *value;
  }

  std::optional<std::string> text(const std::string& name) const {
    if (!has(name)) return std::nullopt;
    const json& v = doc_.at(name);
    if (!v.is_string()) throw ConfigError(fmt::format("key '{}' must be a string", key(name)));
    return v.get<std::string>();
  }

  std::optional<int> integer(const std::string& name) const {
    if (!has(name)) return std::nullopt;
    const json& v = doc_.at(name);
    if (!v.is_number_integer()) throw ConfigError(fmt::format("key '{}' must be an integer", key(name)));
    return v.get<int>();
  }

  const json& child(const std::string& name) const { return doc_.at(name); }
  std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> allowed_;
};

WhiskerSpec parse_whisker(const Section& s) {
  const auto shape_name = s.text("shape");
  if (!shape_name) throw ConfigError(fmt::format("missing key '{}'", s.key("shape")));
  const auto shape = shape_from_string(*shape_name);
  if (!shape) {
    throw ConfigError(fmt::format("key '{}' must be rod, plate or cross (got '{}')", s.key("shape"), *shape_name));
  }
  const double height = s.required_number("height_mm") * kMm;

  WhiskerSpec spec;
  if (*shape == WhiskerShape::Rod) {
    for (const char* name : {"width_mm", "thickness_mm"}) {
      if (s.has(name)) throw ConfigError(fmt::format("key '{}' does not apply to rods; use diameter_mm", s.key(name)));
    }
    spec = WhiskerSpec::rod(s.required_number("diameter_mm") * kMm, height);
  } else {
    if (s.has("diameter_mm")) {
      throw ConfigError(fmt::format("key '{}' applies only to rods; use width_mm", s.key("diameter_mm")));
    }
    const double width = s.required_number("width_mm") * kMm;
    const double thickness = s.number_or("thickness_mm", kSheetThickness / kMm) * kMm;
    spec = *shape == WhiskerShape::Plate ? WhiskerSpec::plate(width, height, thickness)
                                         : WhiskerSpec::cross(width, height, thickness);
  }
  spec.drag_coefficient = s.number_or("drag_coefficient", spec.drag_coefficient);
  spec.stem_height_m = s.number_or("stem_height_mm", spec.stem_height_m / kMm) * kMm;
  return spec;
}

void parse_spring(const Section& s, SpringSpec& spring) {
  spring.torsional_stiffness = s.number_or("torsional_stiffness_Nm_per_rad", spring.torsional_stiffness);
  spring.max_deflection_rad = s.number_or("max_deflection_deg", spring.max_deflection_rad / kDeg) * kDeg;
  if (const auto name = s.text("model")) {
    const auto model = spring_model_from_string(*name);
    if (!model) throw ConfigError(fmt::format("key '{}' must be linear or sine (got '{}')", s.key("model"), *name));
    spring.model = *model;
  }
  if (s.has("geometry")) {
    const Section g(s.child("geometry"), s.key("geometry"),
                    {"material", "thickness_mm", "arm_width_mm", "length_mm", "pitch_mm", "turns"});
    SpringGeometry& geo = spring.geometry;
    geo.material = g.text("material").value_or(geo.material);
    geo.thickness_m = g.number_or("thickness_mm", geo.thickness_m / kMm) * kMm;
    geo.arm_width_m = g.number_or("arm_width_mm", geo.arm_width_m / kMm) * kMm;
    geo.length_m = g.number_or("length_mm", geo.length_m / kMm) * kMm;
    geo.pitch_m = g.number_or("pitch_mm", geo.pitch_m / kMm) * kMm;
    geo.turns = g.integer("turns").value_or(geo.turns);
  }
}

}  // namespace

ResolvedConfig default_config() {
  ResolvedConfig config;
  config.design = SensorDesign::reference();
  config.preset = "Rod3";
  return config;
}

ResolvedConfig parse_config(const json& doc) {
  const Section root(doc, "", {"preset", "whisker", "immersion", "spring", "magnet", "hall", "fluid"});
  ResolvedConfig config;
  SensorDesign& design = config.design;
  design = SensorDesign::reference();

  if (root.has("preset") && root.has("whisker")) {
    throw ConfigError("keys 'preset' and 'whisker' are mutually exclusive");
  }
  if (const auto name = root.text("preset")) {
    const auto preset = find_preset(*name);
    if (!preset) throw ConfigError(fmt::format("key 'preset' names an unknown preset '{}'", *name));
    design.whisker = preset->spec;
    design.immersion = preset->immersion;
    config.preset = preset->name;
  } else if (root.has("whisker")) {
    design.whisker = parse_whisker(Section(root.child("whisker"), "whisker",
                                           {"shape", "height_mm", "diameter_mm", "width_mm", "thickness_mm",
                                            "drag_coefficient", "stem_height_mm"}));
  } else {
    config.preset = "Rod3";
  }

  if (root.has("immersion")) {
    const Section s(root.child("immersion"), "immersion", {"depth_mm"});
    design.immersion.depth_m = s.number_or("depth_mm", design.immersion.depth_m / kMm) * kMm;
  }
  if (root.has("spring")) {
    parse_spring(Section(root.child("spring"), "spring",
                         {"torsional_stiffness_Nm_per_rad", "max_deflection_deg", "model", "geometry"}),
                 design.spring);
  }
  if (root.has("magnet")) {
    const Section s(root.child("magnet"), "magnet", {"edge_mm", "remanence_T", "pivot_offset_mm"});
    MagnetSpec& m = design.magnet;
    m.edge_length_m = s.number_or("edge_mm", m.edge_length_m / kMm) * kMm;
    m.remanence_T = s.number_or("remanence_T", m.remanence_T);
    m.pivot_offset_m = s.number_or("pivot_offset_mm", m.pivot_offset_m / kMm) * kMm;
  }
  if (root.has("hall")) {
    const Section s(root.child("hall"), "hall",
                    {"sensor_offset_mm", "sensitivity_lsb_per_mT", "field_range_mT", "resolution_floor_mT"});
    HallSpec& h = design.hall;
    h.sensor_offset_m = s.number_or("sensor_offset_mm", h.sensor_offset_m / kMm) * kMm;
    h.sensitivity_lsb_per_mT = s.number_or("sensitivity_lsb_per_mT", h.sensitivity_lsb_per_mT);
    h.field_range_mT = s.number_or("field_range_mT", h.field_range_mT);
    // the floor follows the sensitivity unless given
    h.resolution_floor_mT = s.number_or("resolution_floor_mT", 1.0 / h.sensitivity_lsb_per_mT);
  }
  if (root.has("fluid")) {
    const Section s(root.child("fluid"), "fluid", {"density_kg_per_m3"});
    config.fluid_density = s.number_or("density_kg_per_m3", config.fluid_density);
    if (!(config.fluid_density > 0.0)) throw ConfigError("key 'fluid.density_kg_per_m3' must be positive");
  }
  return config;
}

ResolvedConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed JSON: {}", e.what()));
  }
  return parse_config(doc);
}

ResolvedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

nlohmann::json ResolvedConfig::canonical() const {
  const WhiskerSpec& w = design.whisker;
  json whisker = {
      {"shape", std::string(to_string(w.shape))},
      {"height_mm", w.height_m / kMm},
      {"drag_coefficient", w.drag_coefficient},
      {"stem_height_mm", w.stem_height_m / kMm},
  };
  if (w.shape == WhiskerShape::Rod) {
    whisker["diameter_mm"] = w.width_m / kMm;
  } else {
    whisker["width_mm"] = w.width_m / kMm;
    whisker["thickness_mm"] = w.thickness_m / kMm;
  }
  const SpringSpec& s = design.spring;
  const SpringGeometry& g = s.geometry;
  return {
      {"whisker", whisker},
      {"immersion", {{"depth_mm", design.immersion.depth_m / kMm}}},
      {"spring",
       {{"torsional_stiffness_Nm_per_rad", s.torsional_stiffness},
        {"max_deflection_deg", s.max_deflection_rad / kDeg},
        {"model", std::string(to_string(s.model))},
        {"geometry",
         {{"material", g.material},
          {"thickness_mm", g.thickness_m / kMm},
          {"arm_width_mm", g.arm_width_m / kMm},
          {"length_mm", g.length_m / kMm},
          {"pitch_mm", g.pitch_m / kMm},
          {"turns", g.turns}}}}},
      {"magnet",
       {{"edge_mm", design.magnet.edge_length_m / kMm},
        {"remanence_T", design.magnet.remanence_T},
        {"pivot_offset_mm", design.magnet.pivot_offset_m / kMm}}},
      {"hall",
       {{"sensor_offset_mm", design.hall.sensor_offset_m / kMm},
        {"sensitivity_lsb_per_mT", design.hall.sensitivity_lsb_per_mT},
        {"field_range_mT", design.hall.field_range_mT},
        {"resolution_floor_mT", design.hall.resolution_floor_mT}}},
      {"fluid", {{"density_kg_per_m3", fluid_density}}},
  };
}

std::string ResolvedConfig::fingerprint() const { return sha256_hex(canonical().dump()); }

std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int k = 0; k < length; ++k) hex += fmt::format("{:02x}", digest[k]);
  return hex;
}

}  // namespace whisker
