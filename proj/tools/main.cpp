#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "experiments/config.hpp"
#include "experiments/output.hpp"
#include "experiments/runners.hpp"
#include "spikedet/error.hpp"

namespace sx = spikedet::experiments;

namespace {

struct Flags {
  std::string config_path;
  std::map<std::string, std::string> values;
  bool timing = false;
  bool null_model = false;
};

void add_common(CLI::App& sub, Flags& flags) {
  sub.add_option("--config", flags.config_path, "key = value config file")->check(CLI::ExistingFile);
  const std::pair<const char*, const char*> keyed[] = {
      {"seed", "master seed (u64)"},
      {"samples", "Monte-Carlo samples / trials / cloud points"},
      {"n", "dimension, or a comma-separated list"},
      {"out", "output path (default: stdout)"},
      {"format", "csv or json"},
      {"threads", "worker threads (0 = all cores)"},
      {"d", "tensor order"},
      {"r", "spike rank"},
      {"lambdas", "comma-separated amplitudes"},
      {"grams", "identity | all-ones | two-eigenvalue:a,b | [..;..], '|' per mode"},
      {"inner", "inner samples of the likelihood-ratio estimate"},
      {"estimator", "haar or direct (moment)"},
      {"prior", "haar or fixed"},
      {"epsilon", "split level, or auto"},
      {"t", "comma-separated tail levels (xi-tail)"},
      {"bins", "envelope bins (cloud)"},
  };
  for (const auto& [key, help] : keyed) {
    const std::string k = key;
    sub.add_option_function<std::string>("--" + k, [&flags, k](const std::string& v) { flags.values[k] = v; },
                                         help);
  }
  sub.add_flag("--timing", flags.timing, "embed wall-clock duration in outputs");
  sub.add_flag("--null-model", flags.null_model, "admit zero amplitudes");
}

bool write_file(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return static_cast<bool>(std::cout);
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  return static_cast<bool>(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiked tensor detection experiments"};
  app.require_subcommand(1);
  Flags flags;
  const char* kinds[] = {"threshold", "cloud", "moment", "split", "xi-tail", "roc"};
  for (const char* kind : kinds) add_common(*app.add_subcommand(kind, std::string(kind) + " experiment"), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? sx::kExitOk : sx::kExitConfig;
  }

  try {
    sx::ExperimentConfig config;
    if (!flags.config_path.empty()) {
      std::ifstream in(flags.config_path);
      std::stringstream buf;
      buf << in.rdbuf();
      config = sx::parse_config(buf.str());
    }
    config.kind = sx::experiment_from_string(app.get_subcommands().front()->get_name());
    for (const auto& [key, value] : flags.values) sx::set_field(config, key, value);
    if (flags.timing) config.timing = true;
    if (flags.null_model) config.null_model = true;

    const auto start = std::chrono::steady_clock::now();
    sx::RunResult result = sx::run_experiment(config);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    for (const auto& a : result.artifacts) {
      const auto duration = config.timing ? std::optional<double>(seconds) : std::nullopt;
      if (!write_file(a.path, sx::render(a, config, duration))) {
        std::cerr << "spikedet: cannot write '" << a.path << "'\n";
        return sx::kExitConfig;
      }
      if (!a.path.empty()) std::cerr << "spikedet: wrote " << a.path << "\n";
    }
    for (const auto& m : result.messages) std::cerr << "spikedet: " << m << "\n";
    std::cerr << "spikedet: " << sx::to_string(config.kind) << " finished in "
              << sx::format_double(seconds) << " s\n";
    return result.exit_code;
  } catch (const sx::ConfigError& e) {
    std::cerr << "spikedet: config error: " << e.what() << "\n";
    return sx::kExitConfig;
  } catch (const spikedet::DomainError& e) {
    std::cerr << "spikedet: invariant violation: " << e.what() << "\n";
    return sx::kExitInvariant;
  } catch (const std::invalid_argument& e) {
    std::cerr << "spikedet: invalid parameters: " << e.what() << "\n";
    return sx::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "spikedet: error: " << e.what() << "\n";
    return sx::kExitInvariant;
  }
}
