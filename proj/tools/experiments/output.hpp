#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "experiments/config.hpp"

namespace spikedet::experiments {

inline constexpr const char* kToolName = "spikedet";
inline constexpr const char* kToolVersion = "0.1.0";

/// A CSV table or JSON document plus the provenance every file carries.
struct Artifact {
  /// Empty means standard output.
  std::string path;
  OutputFormat format = OutputFormat::Csv;
  std::vector<std::string> columns;
  /// Cells are numbers, booleans, strings or null (empty in CSV). JSON
  /// output lists the rows as objects under "rows".
  std::vector<std::vector<nlohmann::ordered_json>> rows;
  /// Extra "# key: value" lines (CSV) / top-level fields (JSON).
  std::vector<std::pair<std::string, nlohmann::ordered_json>> notes;
};

/// CSV: "#" comment lines with tool, version, seed, resolved config (and
/// duration when given), then the header row. JSON: one object with the
/// same provenance followed by the notes and rows.
std::string render(const Artifact& artifact, const ExperimentConfig& config,
                   std::optional<double> duration_seconds = std::nullopt);

/// RFC-4180 quoting when needed.
std::string csv_field(const std::string& s);

/// CSV text of one cell: doubles with 17 significant digits.
std::string cell_text(const nlohmann::ordered_json& cell);

}  // namespace spikedet::experiments
