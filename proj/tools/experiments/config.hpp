#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spikedet/linalg.hpp"
#include "spikedet/moments.hpp"
#include "spikedet/spike_model.hpp"

namespace spikedet::experiments {

/// Bad configuration text or flag. `line` is 0 for flags.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& message);

  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

enum class Experiment { Threshold, Cloud, Moment, Split, XiTail, Roc };
enum class OutputFormat { Csv, Json };
enum class Estimator { Haar, Direct };

std::string to_string(Experiment kind);
Experiment experiment_from_string(const std::string& text);

/// One mode's Gram: a named preset or a literal r x r matrix.
struct GramEntry {
  enum class Kind { Identity, AllOnes, TwoEigenvalue, Literal };
  Kind kind = Kind::Identity;
  double a = 0.0;
  double b = 0.0;
  CMatrix literal;

  CMatrix resolve(int r) const;
  friend bool operator==(const GramEntry& x, const GramEntry& y);
};

struct ExperimentConfig {
  Experiment kind = Experiment::Threshold;
  int d = 3;
  int r = 1;
  std::vector<double> lambdas{0.5};
  /// One entry for all modes, or one per mode.
  std::vector<GramEntry> grams{GramEntry{}};
  std::vector<int> n{4};
  std::uint64_t samples = 10000;
  std::uint64_t inner = 100;
  Estimator estimator = Estimator::Haar;
  SpikePrior prior = SpikePrior::HaarRotated;
  std::optional<double> epsilon;
  std::vector<double> t{0.3, 0.5, 0.7};
  int bins = 50;
  std::uint64_t seed = 1;
  bool null_model = false;
  OutputFormat format = OutputFormat::Csv;
  std::string out;
  unsigned threads = 0;
  bool timing = false;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses key = value lines ('#' starts a comment) on top of the defaults.
ExperimentConfig parse_config(const std::string& text);

/// Sets one field from its text form. `line` is only used in diagnostics.
void set_field(ExperimentConfig& config, const std::string& key, const std::string& value,
               int line = 0);

/// Canonical key = value pairs. Execution-only keys (out, threads, timing)
/// are included only when `execution` is true.
std::vector<std::pair<std::string, std::string>> config_fields(const ExperimentConfig& config,
                                                               bool execution = true);

/// config_fields as text, one "key = value" per line.
std::string serialize_config(const ExperimentConfig& config, bool execution = true);

/// The resolved Gram set (d modes) with the configured rank.
GramSet resolve_grams(const ExperimentConfig& config);

/// The spike for dimension n; factors are the unrotated Gram square roots.
SpikeSpec build_spec(const ExperimentConfig& config, int n);

/// "%.17g".
std::string format_double(double x);

}  // namespace spikedet::experiments
