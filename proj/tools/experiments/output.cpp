#include "experiments/output.hpp"

#include <cstdint>

namespace spikedet::experiments {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string cell_text(const nlohmann::ordered_json& cell) {
  if (cell.is_null()) return {};
  if (cell.is_string()) return cell.get<std::string>();
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  if (cell.is_number_unsigned()) return std::to_string(cell.get<std::uint64_t>());
  if (cell.is_number_integer()) return std::to_string(cell.get<std::int64_t>());
  if (cell.is_number_float()) return format_double(cell.get<double>());
  return cell.dump();
}

std::string render(const Artifact& a, const ExperimentConfig& config,
                   std::optional<double> duration_seconds) {
  const auto fields = config_fields(config, false);
  if (a.format == OutputFormat::Json) {
    nlohmann::ordered_json doc;
    doc["tool"] = kToolName;
    doc["version"] = kToolVersion;
    doc["seed"] = config.seed;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : fields) cfg[k] = v;
    doc["config"] = cfg;
    if (duration_seconds) doc["duration_seconds"] = *duration_seconds;
    for (const auto& [k, v] : a.notes) doc[k] = v;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : a.rows) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < row.size() && i < a.columns.size(); ++i) obj[a.columns[i]] = row[i];
      rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
  }
  std::string s;
  s += "# tool: " + std::string(kToolName) + "\n";
  s += "# version: " + std::string(kToolVersion) + "\n";
  s += "# seed: " + std::to_string(config.seed) + "\n";
  for (const auto& [k, v] : fields) s += "# config." + k + ": " + v + "\n";
  if (duration_seconds) s += "# duration_seconds: " + format_double(*duration_seconds) + "\n";
  for (const auto& [k, v] : a.notes) s += "# " + k + ": " + cell_text(v) + "\n";
  for (std::size_t i = 0; i < a.columns.size(); ++i) s += (i ? "," : "") + csv_field(a.columns[i]);
  s += "\n";
  for (const auto& row : a.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + csv_field(cell_text(row[i]));
    s += "\n";
  }
  return s;
}

}  // namespace spikedet::experiments
