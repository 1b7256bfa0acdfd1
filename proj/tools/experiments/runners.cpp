#include "experiments/runners.hpp"

#include <cmath>
#include <limits>

#include "spikedet/eta.hpp"
#include "spikedet/thresholds.hpp"

namespace spikedet::experiments {
namespace {

using Cell = nlohmann::ordered_json;

constexpr double kMaxWork = 5e10;

[[noreturn]] void refuse(const std::string& field, const std::string& message) {
  throw ConfigError(field, 0, message + " (desk-scale limit; reduce the setting or split the run)");
}

double power(int base, int exp) { return std::pow(static_cast<double>(base), exp); }

int max_n(const ExperimentConfig& c) {
  int m = 0;
  for (int n : c.n) m = std::max(m, n);
  return m;
}

Artifact make_artifact(const ExperimentConfig& c, std::vector<std::string> columns,
                       const std::string& path) {
  Artifact a;
  a.path = path;
  a.format = c.format;
  a.columns = std::move(columns);
  return a;
}

Cell seed_cell(SeedSpec s) { return Cell(s.stream_id); }

SeedSpec stream_for(const ExperimentConfig& c, int n) {
  return SeedSpec{c.seed, static_cast<std::uint64_t>(n)};
}

unsigned threads_of(const ExperimentConfig& c) { return resolve_threads(c.threads); }

}  // namespace

std::string sibling_path(const std::string& path, const std::string& tag) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "." + tag;
  return path.substr(0, dot) + "." + tag + path.substr(dot);
}

void check_limits(const ExperimentConfig& c) {
  if (c.n.empty()) refuse("n", "no n values given");
  const int n = max_n(c);
  switch (c.kind) {
    case Experiment::Threshold:
      if (c.d > 64) refuse("d", "d must be <= 64");
      break;
    case Experiment::Moment:
    case Experiment::Split:
      if (c.samples < 2) refuse("samples", "samples must be >= 2");
      if (c.kind == Experiment::Moment && c.estimator == Estimator::Direct) {
        if (power(n, c.d) > 4096) refuse("n", "direct estimator needs n^d <= 4096");
        if (static_cast<double>(c.samples) * static_cast<double>(c.inner) > 1e8) {
          refuse("samples", "samples * inner must be <= 1e8");
        }
        if (c.inner < 1) refuse("inner", "inner must be >= 1");
      } else {
        if (n > 256) refuse("n", "n must be <= 256");
        if (static_cast<double>(c.samples) * c.d * power(n, 3) > kMaxWork) {
          refuse("samples", "samples * d * n^3 must be <= 5e10");
        }
      }
      break;
    case Experiment::Roc:
      if (c.samples < 1) refuse("samples", "samples (trials) must be >= 1");
      if (c.inner < 1) refuse("inner", "inner must be >= 1");
      if (power(n, c.d) > 4096) refuse("n", "roc needs n^d <= 4096");
      if (static_cast<double>(c.samples) * static_cast<double>(c.inner) > 1e8) {
        refuse("samples", "samples * inner must be <= 1e8");
      }
      break;
    case Experiment::Cloud:
      if (c.n.size() != 1) refuse("n", "cloud takes a single n");
      if (c.samples < 1 || c.samples > 10'000'000) refuse("samples", "samples must be in [1, 1e7]");
      if (n > 1024) refuse("n", "n must be <= 1024");
      if (c.r > 32) refuse("r", "r must be <= 32");
      break;
    case Experiment::XiTail:
      for (int v : c.n) {
        if (v < 2) refuse("n", "xi-tail needs n >= 2");
      }
      if (c.samples < 1) refuse("samples", "samples must be >= 1");
      if (static_cast<double>(c.samples) * n * static_cast<double>(c.t.size() * c.n.size()) > 1e10) {
        refuse("samples", "samples * n * (#t) * (#n) must be <= 1e10");
      }
      break;
  }
}

RunResult run_threshold(const ExperimentConfig& c) {
  if (c.lambdas.size() != static_cast<std::size_t>(c.r)) {
    throw ConfigError("lambdas", 0, "expected r = " + std::to_string(c.r) + " amplitudes");
  }
  for (double l : c.lambdas) {
    if (!(l > 0.0) && !c.null_model) throw ConfigError("lambdas", 0, "amplitudes must be > 0");
  }
  const GramSet grams = resolve_grams(c);
  const ThresholdReport rep = threshold_report(c.lambdas, grams);
  Artifact a = make_artifact(c,
                             {"d", "beta_d", "detection_scale", "sum_lambda", "eta_max", "hoelder_ok",
                              "hoelder_margin", "main_ok", "main_margin", "conclusive", "d2_mu_max",
                              "d2_ok"},
                             c.out);
  a.rows.push_back({rep.d, rep.beta_d, detection_scale(rep.d), rep.sum_lambda, rep.eta_max,
                    rep.hoelder_ok, rep.hoelder_margin, rep.main_ok, rep.main_margin, rep.conclusive,
                    rep.d2_mu_max ? Cell(*rep.d2_mu_max) : Cell(nullptr),
                    rep.d2_ok ? Cell(*rep.d2_ok) : Cell(nullptr)});
  RunResult out;
  out.artifacts.push_back(std::move(a));
  return out;
}

RunResult run_moment(const ExperimentConfig& c) {
  Artifact a = make_artifact(c,
                             {"n", "estimator", "count", "mean", "stderr", "log_mean", "log_domain_max",
                              "seed", "stream"},
                             c.out);
  for (int n : c.n) {
    const SpikeSpec spec = build_spec(c, n);
    const SeedSpec seed = stream_for(c, n);
    const bool direct = c.estimator == Estimator::Direct;
    const MCEstimate est = direct ? second_moment_direct_mc(spec, c.samples, c.inner, seed, c.prior,
                                                            threads_of(c))
                                  : second_moment_haar_mc(spec, c.samples, seed, threads_of(c));
    a.rows.push_back({n, direct ? "direct" : "haar", est.count, est.mean, est.std_error, est.log_mean,
                      est.log_domain_max, est.seed.master_seed, seed_cell(est.seed)});
  }
  RunResult out;
  out.artifacts.push_back(std::move(a));
  return out;
}

RunResult run_split(const ExperimentConfig& c) {
  Artifact a = make_artifact(c,
                             {"n", "epsilon", "eta_max", "count", "e1_mean", "e1_stderr", "e2_mean",
                              "e2_stderr", "total_mean", "total_stderr", "seed", "stream"},
                             c.out);
  RunResult out;
  for (int n : c.n) {
    const SpikeSpec spec = build_spec(c, n);
    const SeedSpec seed = stream_for(c, n);
    const double emax = eta_max(spec.lambdas, gram_set(spec));
    double eps = c.epsilon ? *c.epsilon : default_split_epsilon(spec);
    if (!(eps > 0.0)) eps = std::numeric_limits<double>::min();
    const SplitEstimate s = e1_e2_split(spec, eps, c.samples, seed, threads_of(c));
    if (s.e1.mean + s.e2.mean != s.total.mean) {
      out.exit_code = kExitInvariant;
      out.messages.push_back("n=" + std::to_string(n) + ": E1 + E2 differs from the total");
    }
    a.rows.push_back({n, s.epsilon, emax, s.total.count, s.e1.mean, s.e1.std_error, s.e2.mean,
                      s.e2.std_error, s.total.mean, s.total.std_error, seed.master_seed,
                      seed_cell(seed)});
  }
  out.artifacts.push_back(std::move(a));
  return out;
}

RunResult run_xi_tail(const ExperimentConfig& c) {
  Artifact a = make_artifact(c, {"n", "t", "analytic", "empirical", "stderr", "count", "seed", "stream"},
                             c.out);
  for (int n : c.n) {
    for (std::size_t i = 0; i < c.t.size(); ++i) {
      const SeedSpec seed = stream_for(c, n).child(i);
      const MCEstimate est = xi_empirical_tail(n, c.t[i], c.samples, seed);
      a.rows.push_back({n, c.t[i], xi_tail_probability(c.t[i], n), est.mean, est.std_error, est.count,
                        seed.master_seed, seed_cell(seed)});
    }
  }
  RunResult out;
  out.artifacts.push_back(std::move(a));
  return out;
}

RunResult run_roc(const ExperimentConfig& c) {
  Artifact a = make_artifact(c, {"n", "threshold", "fpr", "tpr"}, c.out);
  for (int n : c.n) {
    const SpikeSpec spec = build_spec(c, n);
    const RocCurve roc = roc_experiment(spec, c.samples, c.inner, stream_for(c, n), threads_of(c), c.prior);
    a.notes.emplace_back("tv_proxy.n" + std::to_string(n), roc.tv_proxy);
    for (const RocPoint& p : roc.points) {
      a.rows.push_back({n, std::isinf(p.threshold) ? Cell("inf") : Cell(p.threshold), p.fpr, p.tpr});
    }
  }
  RunResult out;
  out.artifacts.push_back(std::move(a));
  return out;
}

RunResult run_cloud(const ExperimentConfig& c) {
  const int n = c.n.front();
  const SpikeSpec spec = build_spec(c, n);
  const GrfCloud cloud = sample_grf_cloud(spec, c.samples, stream_for(c, n), c.bins, threads_of(c));
  const std::string base =
      c.out.empty() ? (c.format == OutputFormat::Json ? "cloud.json" : "cloud.csv") : c.out;

  std::vector<std::pair<std::string, Cell>> notes{
      {"eta_max", cloud.eta_max},
      {"bound_violations", cloud.bound_violations},
      {"per_block_violations", cloud.per_block_violations},
      {"range_violations", cloud.range_violations},
      {"median_gap_0.3_0.8", median_envelope_gap(cloud, 0.3, 0.8)}};

  Artifact points = make_artifact(c, {"x", "y"}, base);
  points.notes = notes;
  for (const CloudPoint& p : cloud.points) points.rows.push_back({p.x, p.y});

  Artifact env = make_artifact(c, {"bin_center", "max_y", "bound_value", "bound_sup"},
                               sibling_path(base, "envelope"));
  env.notes = notes;
  Artifact bound = make_artifact(c, {"bin_center", "bound_value"}, sibling_path(base, "bound"));
  bound.notes = notes;
  const double width = 2.0 * cloud.eta_max / c.bins;
  for (int b = 0; b < c.bins; ++b) {
    const double center = -cloud.eta_max + (b + 0.5) * width;
    bound.rows.push_back({center, -grf_lower_bound(center, cloud.eta_max, cloud.d)});
  }
  for (const EnvelopeBin& e : cloud.envelope) env.rows.push_back({e.center, e.max_y, e.bound, e.bound_sup});

  RunResult out;
  const std::size_t bad = cloud.bound_violations + cloud.per_block_violations + cloud.range_violations;
  if (bad > 0) {
    out.exit_code = kExitInvariant;
    out.messages.push_back("cloud: " + std::to_string(cloud.bound_violations) + " bound, " +
                           std::to_string(cloud.per_block_violations) + " per-block and " +
                           std::to_string(cloud.range_violations) + " range violations");
  }
  out.artifacts.push_back(std::move(points));
  out.artifacts.push_back(std::move(env));
  out.artifacts.push_back(std::move(bound));
  return out;
}

RunResult run_experiment(const ExperimentConfig& c) {
  check_limits(c);
  switch (c.kind) {
    case Experiment::Threshold: return run_threshold(c);
    case Experiment::Cloud: return run_cloud(c);
    case Experiment::Moment: return run_moment(c);
    case Experiment::Split: return run_split(c);
    case Experiment::XiTail: return run_xi_tail(c);
    case Experiment::Roc: return run_roc(c);
  }
  return {};
}

}  // namespace spikedet::experiments
