// Design configuration files.
//
// Lengths are given in millimetres under keys ending in _mm; every other
// quantity carries its unit in the key name. Unknown keys are rejected.
//
//   {
//     "preset": "Rod3",                        // or a "whisker" section
//     "whisker":   {"shape": "rod", "height_mm": 60, "diameter_mm": 3,
//                   "drag_coefficient": 1.1, "stem_height_mm": 5},
//     "immersion": {"depth_mm": 30},
//     "spring":    {"torsional_stiffness_Nm_per_rad": 3.47e-3,
//                   "max_deflection_deg": 20, "model": "linear"},
//     "magnet":    {"edge_mm": 2, "remanence_T": 1.2, "pivot_offset_mm": 1.1},
//     "hall":      {"sensor_offset_mm": 4, "sensitivity_lsb_per_mT": 5,
//                   "field_range_mT": 230, "resolution_floor_mT": 0.2},
//     "fluid":     {"density_kg_per_m3": 1000}
//   }
//
// Plates and crosses take width_mm and an optional thickness_mm (default
// 1.5) instead of diameter_mm. Every section and key is optional except
// that a whisker section needs shape, height and its cross-section.
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "whisker/sensor_model.hpp"

namespace whisker {

struct ResolvedConfig {
  SensorDesign design;
  double fluid_density = kFreshWaterDensity;
  std::optional<std::string> preset;

  // Every resolved value in the file schema, SI where the schema is.
  nlohmann::json canonical() const;
  // SHA-256 (hex) of the compact canonical document.
  std::string fingerprint() const;
};

// Throws ConfigError naming the offending key. The design is not
// validated beyond the schema; construct a SensorModel for that.
ResolvedConfig parse_config(const nlohmann::json& doc);
ResolvedConfig parse_config_text(const std::string& text);
ResolvedConfig load_config(const std::filesystem::path& path);

ResolvedConfig default_config();

std::string sha256_hex(const std::string& data);

}  // namespace whisker
