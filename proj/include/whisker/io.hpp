// File formats shared by the command-line tool: run manifests, sensor
// streams, estimates, calibration samples and sweep grids.
//
// CSV files open with "# key: value" comment lines (units, manifest,
// fingerprint) followed by a header row.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "whisker/calibration.hpp"
#include "whisker/design_explorer.hpp"
#include "whisker/flow_sim.hpp"

namespace whisker {

inline constexpr const char* kManifestName = "manifest.json";

std::string tool_version();

struct RunManifest {
  std::string command;
  std::string fingerprint;
  std::optional<std::uint64_t> seed;
  nlohmann::json arguments = nlohmann::json::object();
  std::vector<std::string> outputs;  // relative to the manifest

  nlohmann::json to_json() const;
};

// Writes <dir>/manifest.json.
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

// Writes text, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::string trace_csv(const SimTrace& trace);
std::string estimates_csv(std::span<const StreamEstimate> estimates, const std::string& fingerprint);
std::string sweep_csv(const SweepGrid& grid);
nlohmann::json sweep_json(const SweepGrid& grid);

// Readings with columns t_s, bx_lsb, by_lsb, bz_lsb. Truth columns
// v_true_mps and theta_true_deg are read when present. Throws DataError.
SimTrace read_trace_csv(std::istream& in);
SimTrace read_trace_csv(const std::filesystem::path& path);

// Calibration pairs with columns bx_lsb, by_lsb, speed_mps, theta_deg
// (counts may be fractional). A zero reading contributes no orientation
// sample. Throws DataError.
CalibrationSamples read_calibration_csv(std::istream& in);
CalibrationSamples read_calibration_csv(const std::filesystem::path& path);

std::string calibration_residuals_csv(const CalibrationModel& model, const CalibrationSamples& samples);

// Velocity profile: {"knots": [{"t_s":..,"v_mps":..,"theta_deg":..}, ...],
// "max_acceleration_mps2": optional}. Throws ConfigError.
VelocityProfile parse_profile(const nlohmann::json& doc);
VelocityProfile load_profile(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace whisker
