#pragma once

#include <string>
#include <vector>

#include "experiments/config.hpp"
#include "experiments/output.hpp"

namespace spikedet::experiments {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInvariant = 2;

struct RunResult {
  int exit_code = kExitOk;
  std::vector<Artifact> artifacts;
  /// Human-readable lines for stderr.
  std::vector<std::string> messages;
};

/// Throws ConfigError when the run would exceed the desk-scale limits.
void check_limits(const ExperimentConfig& config);

RunResult run_threshold(const ExperimentConfig& config);
RunResult run_cloud(const ExperimentConfig& config);
RunResult run_moment(const ExperimentConfig& config);
RunResult run_split(const ExperimentConfig& config);
RunResult run_xi_tail(const ExperimentConfig& config);
RunResult run_roc(const ExperimentConfig& config);

/// check_limits, then the runner for config.kind. Config problems surface as
/// ConfigError; invariant breaches as exit_code == kExitInvariant.
RunResult run_experiment(const ExperimentConfig& config);

/// "dir/name.csv" + "envelope" -> "dir/name.envelope.csv".
std::string sibling_path(const std::string& path, const std::string& tag);

}  // namespace spikedet::experiments
