#include "whisker/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "whisker/errors.hpp"

namespace whisker {

using nlohmann::json;

std::string tool_version() { return "0.1.0"; }

json RunManifest::to_json() const {
  json out = {
      {"command", command},
      {"design_fingerprint", fingerprint},
      {"tool", "whisker"},
      {"version", tool_version()},
      {"arguments", arguments},
      {"outputs", outputs},
  };
  out["seed"] = seed ? json(*seed) : json(nullptr);
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw ConfigError(fmt::format("failed writing '{}'", path.string()));
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  write_text_file(dir / kManifestName, manifest.to_json().dump(2) + "\n");
}

namespace {

std::string num(double value) { return fmt::format("{}", value); }

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& text, std::size_t line, const std::string& column) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value)) {
    throw DataError(fmt::format("line {}: column '{}' value '{}' is not a number", line, column, text));
  }
  return value;
}

// Comment metadata plus a header-indexed table.
struct CsvTable {
  std::map<std::string, std::string> meta;
  std::map<std::string, std::size_t> columns;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, cells)

  std::size_t column(const std::string& name) const {
    const auto it = columns.find(name);
    if (it == columns.end()) throw DataError(fmt::format("missing CSV column '{}'", name));
    return it->second;
  }
  std::optional<std::size_t> optional_column(const std::string& name) const {
    const auto it = columns.find(name);
    if (it == columns.end()) return std::nullopt;
    return it->second;
  }
};

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t number = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++number;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const std::size_t colon = text.find(':');
      if (colon != std::string::npos) table.meta[trim(text.substr(1, colon - 1))] = trim(text.substr(colon + 1));
      continue;
    }
    auto cells = split_csv(text);
    if (!header) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (!table.columns.emplace(cells[k], k).second) {
          throw DataError(fmt::format("line {}: duplicate column '{}'", number, cells[k]));
        }
      }
      header = true;
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw DataError(fmt::format("line {}: expected {} fields, found {}", number, table.columns.size(), cells.size()));
    }
    table.rows.emplace_back(number, std::move(cells));
  }
  if (!header) throw DataError("CSV input has no header row");
  return table;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot read '{}'", path.string()));
  return in;
}

}  // namespace

std::string trace_csv(const SimTrace& trace) {
  std::string out;
  out += fmt::format("# manifest: {}\n", kManifestName);
  out += fmt::format("# design_fingerprint: {}\n", trace.design_fingerprint);
  out += fmt::format("# sample_rate_hz: {}\n", num(trace.sample_rate_hz));
  out += fmt::format("# seed: {}\n", trace.seed);
  out += fmt::format("# noise_sigma_lsb: {}\n", num(trace.noise_sigma_lsb));
  out += fmt::format("# fluid_density_kg_per_m3: {}\n", num(trace.fluid_density));
  const VivConfig& v = trace.viv;
  out += fmt::format(
      "# viv: synthetic tone, enabled={} strouhal={} bell_peak_mps={} bell_width_mps={} bell_amplitude_mT={} "
      "ramp_start_mps={} ramp_end_mps={} ramp_amplitude_mT={}\n",
      v.enabled, num(v.strouhal), num(v.bell_peak_mps), num(v.bell_width_mps), num(v.bell_amplitude_mT),
      num(v.ramp_start_mps), num(v.ramp_end_mps), num(v.ramp_amplitude_mT));
  out += "# units: t_s [s], v_true_mps [m/s], theta_true_deg [deg], bx_lsb/by_lsb/bz_lsb [LSB], saturated [0/1]\n";
  out += "t_s,v_true_mps,theta_true_deg,bx_lsb,by_lsb,bz_lsb,saturated\n";
  for (const TraceRow& row : trace.rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", num(row.t_s), num(row.speed_mps), num(row.theta_deg), row.reading.bx,
                       row.reading.by, row.reading.bz, row.reading.saturated ? 1 : 0);
  }
  return out;
}

std::string estimates_csv(std::span<const StreamEstimate> estimates, const std::string& fingerprint) {
  std::string out;
  out += fmt::format("# manifest: {}\n", kManifestName);
  out += fmt::format("# design_fingerprint: {}\n", fingerprint);
  out += "# units: t_s [s], v_est_mps [m/s], theta_est_deg [deg, empty below the orientation floor], "
         "valid [0/1], saturated [0/1]\n";
  out += "t_s,v_est_mps,theta_est_deg,valid,saturated\n";
  for (const StreamEstimate& e : estimates) {
    out += fmt::format("{},{},{},{},{}\n", num(e.t_s), num(e.speed_mps), e.theta_deg ? num(*e.theta_deg) : "",
                       e.valid ? 1 : 0, e.saturated ? 1 : 0);
  }
  return out;
}

std::string sweep_csv(const SweepGrid& grid) {
  const std::string a1(to_string(grid.axis1.parameter));
  const std::string a2 = grid.axis2 ? std::string(to_string(grid.axis2->parameter)) : "";
  std::string out;
  out += fmt::format("# manifest: {}\n", kManifestName);
  out += fmt::format("# design_fingerprint: {}\n", grid.design_fingerprint);
  out += "# units: v_mid_mps/v_max_mps [m/s], sensitivity_point/sensitivity_secant [LSB per mm/s]; "
         "axis units are in the column names\n";
  out += fmt::format("i,{}{}", a1, grid.axis2 ? fmt::format(",j,{}", a2) : "");
  out += ",v_mid_mps,v_max_mps,sensitivity_point,sensitivity_secant,valid,reason\n";
  for (const SweepCell& cell : grid.cells) {
    out += fmt::format("{},{}", cell.i, grid.axis1.label(cell.i));
    if (grid.axis2) out += fmt::format(",{},{}", cell.j, grid.axis2->label(cell.j));
    if (cell.metrics) {
      const DesignMetrics& m = *cell.metrics;
      out += fmt::format(",{},{},{},{},1,\n", num(m.v_mid_mps), num(m.v_max_mps), num(m.sensitivity_point),
                         num(m.sensitivity_secant));
    } else {
      out += fmt::format(",,,,,0,{}\n", cell.reason);
    }
  }
  return out;
}

json sweep_json(const SweepGrid& grid) {
  auto axis_json = [](const SweepAxis& axis) {
    json a = {{"parameter", std::string(to_string(axis.parameter))}, {"unit", std::string(unit_of(axis.parameter))}};
    if (axis.parameter == SweepParameter::Preset) {
      a["values"] = axis.names;
    } else {
      a["values"] = axis.values;
    }
    return a;
  };
  json cells = json::array();
  for (const SweepCell& cell : grid.cells) {
    json c = {{"i", cell.i}, {"valid", cell.valid()}};
    if (grid.axis2) c["j"] = cell.j;
    if (cell.metrics) {
      c["v_mid_mps"] = cell.metrics->v_mid_mps;
      c["v_max_mps"] = cell.metrics->v_max_mps;
      c["sensitivity_point"] = cell.metrics->sensitivity_point;
      c["sensitivity_secant"] = cell.metrics->sensitivity_secant;
    } else {
      c["reason"] = cell.reason;
      c["detail"] = cell.detail;
    }
    cells.push_back(std::move(c));
  }
  json out = {
      {"manifest", kManifestName},
      {"design_fingerprint", grid.design_fingerprint},
      {"units",
       {{"v_mid_mps", "m/s"},
        {"v_max_mps", "m/s"},
        {"sensitivity_point", "LSB per mm/s"},
        {"sensitivity_secant", "LSB per mm/s"}}},
      {"axis1", axis_json(grid.axis1)},
      {"cells", cells},
  };
  if (grid.axis2) out["axis2"] = axis_json(*grid.axis2);
  return out;
}

SimTrace read_trace_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  SimTrace trace;
  auto meta_number = [&](const char* key, double fallback) {
    const auto it = table.meta.find(key);
    return it == table.meta.end() ? fallback : parse_double(it->second, 0, key);
  };
  trace.sample_rate_hz = meta_number("sample_rate_hz", trace.sample_rate_hz);
  trace.noise_sigma_lsb = meta_number("noise_sigma_lsb", 0.0);
  trace.fluid_density = meta_number("fluid_density_kg_per_m3", kFreshWaterDensity);
  if (const auto it = table.meta.find("design_fingerprint"); it != table.meta.end()) {
    trace.design_fingerprint = it->second;
  }

  const std::size_t ct = table.column("t_s");
  const std::size_t cx = table.column("bx_lsb");
  const std::size_t cy = table.column("by_lsb");
  const std::size_t cz = table.column("bz_lsb");
  const auto cv = table.optional_column("v_true_mps");
  const auto ca = table.optional_column("theta_true_deg");
  const auto cs = table.optional_column("saturated");
  auto count = [](double value, std::size_t line, const char* column) {
    if (value != std::round(value) || std::abs(value) > 1e9) {
      throw DataError(fmt::format("line {}: column '{}' must hold whole LSB counts", line, column));
    }
    return static_cast<int>(value);
  };
  for (const auto& [line, cells] : table.rows) {
    TraceRow row;
    row.t_s = parse_double(cells[ct], line, "t_s");
    row.reading.t_s = row.t_s;
    row.reading.bx = count(parse_double(cells[cx], line, "bx_lsb"), line, "bx_lsb");
    row.reading.by = count(parse_double(cells[cy], line, "by_lsb"), line, "by_lsb");
    row.reading.bz = count(parse_double(cells[cz], line, "bz_lsb"), line, "bz_lsb");
    if (cv) row.speed_mps = parse_double(cells[*cv], line, "v_true_mps");
    if (ca) row.theta_deg = parse_double(cells[*ca], line, "theta_true_deg");
    if (cs) row.reading.saturated = parse_double(cells[*cs], line, "saturated") != 0.0;
    trace.rows.push_back(row);
  }
  if (trace.rows.empty()) throw DataError("trace has no rows");
  return trace;
}

SimTrace read_trace_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_trace_csv(in);
}

CalibrationSamples read_calibration_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  const std::size_t cx = table.column("bx_lsb");
  const std::size_t cy = table.column("by_lsb");
  const std::size_t cv = table.column("speed_mps");
  const auto ca = table.optional_column("theta_deg");
  CalibrationSamples out;
  for (const auto& [line, cells] : table.rows) {
    const double bx = parse_double(cells[cx], line, "bx_lsb");
    const double by = parse_double(cells[cy], line, "by_lsb");
    out.speed.push_back({std::hypot(bx, by), parse_double(cells[cv], line, "speed_mps")});
    if (ca && (bx != 0.0 || by != 0.0)) {
      out.orientation.push_back({invert_orientation(bx, by), parse_double(cells[*ca], line, "theta_deg")});
    }
  }
  return out;
}

CalibrationSamples read_calibration_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_calibration_csv(in);
}

std::string calibration_residuals_csv(const CalibrationModel& model, const CalibrationSamples& samples) {
  std::string out;
  out += fmt::format("# manifest: {}\n", kManifestName);
  out += fmt::format("# design_fingerprint: {}\n", model.design_fingerprint);
  out += fmt::format(
      "# units: x [{}], observed/fitted/residual [m/s for speed rows, deg for orientation rows]\n",
      model.magnitude_unit);
  out += "kind,x,observed,fitted,residual\n";
  for (const SpeedSample& s : samples.speed) {
    const double fit = model.speed_at(s.magnitude);
    out += fmt::format("speed,{},{},{},{}\n", num(s.magnitude), num(s.speed_mps), num(fit), num(s.speed_mps - fit));
  }
  for (const OrientationSample& s : samples.orientation) {
    const double fit = model.c * s.angle_deg;
    out += fmt::format("orientation,{},{},{},{}\n", num(s.angle_deg), num(s.theta_deg), num(fit),
                       num(s.theta_deg - fit));
  }
  return out;
}

VelocityProfile parse_profile(const json& doc) {
  if (!doc.is_object()) throw ConfigError("velocity profile must be a JSON object");
  for (const auto& item : doc.items()) {
    if (item.key() != "knots" && item.key() != "max_acceleration_mps2") {
      throw ConfigError(fmt::format("unknown key '{}' in velocity profile", item.key()));
    }
  }
  if (!doc.contains("knots") || !doc.at("knots").is_array()) {
    throw ConfigError("velocity profile needs a 'knots' array");
  }
  VelocityProfile profile;
  std::size_t index = 0;
  for (const json& knot : doc.at("knots")) {
    if (!knot.is_object()) throw ConfigError(fmt::format("knots[{}] must be an object", index));
    ProfileKnot k;
    for (const auto& item : knot.items()) {
      const std::string& key = item.key();
      if (!item.value().is_number()) throw ConfigError(fmt::format("knots[{}].{} must be a number", index, key));
      const double value = item.value().get<double>();
      if (key == "t_s") {
        k.t_s = value;
      } else if (key == "v_mps") {
        k.speed_mps = value;
      } else if (key == "theta_deg") {
        k.theta_deg = value;
      } else {
        throw ConfigError(fmt::format("unknown key 'knots[{}].{}'", index, key));
      }
    }
    if (!knot.contains("t_s") || !knot.contains("v_mps")) {
      throw ConfigError(fmt::format("knots[{}] needs t_s and v_mps", index));
    }
    profile.knots.push_back(k);
    ++index;
  }
  if (doc.contains("max_acceleration_mps2")) {
    const json& a = doc.at("max_acceleration_mps2");
    if (!a.is_null()) {
      if (!a.is_number()) throw ConfigError("max_acceleration_mps2 must be a number");
      profile.max_acceleration_mps2 = a.get<double>();
    }
  }
  profile.validate();
  return profile;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: malformed JSON: {}", path.string(), e.what()));
  }
}

VelocityProfile load_profile(const std::filesystem::path& path) { return parse_profile(read_json_file(path)); }

}  // namespace whisker
