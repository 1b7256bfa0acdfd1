#pragma once

#include <optional>
#include <span>

#include "spikedet/spike_model.hpp"

namespace spikedet {

/// -log(1 - u^2) / u^d evaluated as -log1p(-u^2) / u^d. Returns +inf at u = 1
/// and the u -> 0 limit (1 for d = 2, +inf for d > 2) at u = 0.
double beta_objective(double u, int d);

/// sqrt(min_{u in (0,1)} beta_objective(u, d)): grid scan with `grid_points`
/// interior points, then golden-section refinement to `tol` in u. The d = 2
/// infimum sits at the u -> 0 endpoint and is taken from the limit.
double beta_d_second(int d, double tol = 1e-10, int grid_points = 10000);

/// Minimizer u* of beta_objective for d > 2 (same procedure as beta_d_second).
double beta_d_minimizer(int d, double tol = 1e-10, int grid_points = 10000);

/// sqrt(d/2) · β_d, the amplitude scale both sufficient conditions compare to.
double detection_scale(int d);

struct ConditionResult {
  bool ok = false;
  /// Threshold minus statistic; positive iff the condition holds.
  double margin = 0.0;
};

/// Σ λ_i < sqrt(d/2) β_d (strict).
ConditionResult hoelder_condition(std::span<const double> lambdas, int d);

/// sqrt(η_max) < sqrt(d/2) β_d (strict).
ConditionResult main_condition(std::span<const double> lambdas, const GramSet& grams, int d);

/// Largest eigenvalue of X_0 X_0* for d = 2, from the r x r product
/// Λ conj(G_2) Λ G_1. Throws ParameterError if d != 2.
double matrix_case_mu_max(const SpikeSpec& spec);
double matrix_case_mu_max(std::span<const double> lambdas, const GramSet& grams);

struct ThresholdReport {
  int d = 0;
  double beta_d = 0.0;
  double sum_lambda = 0.0;
  double eta_max = 0.0;
  bool hoelder_ok = false;
  double hoelder_margin = 0.0;
  bool main_ok = false;
  double main_margin = 0.0;
  /// The indistinguishability conclusion of the η_max condition is only
  /// established for d > 2; for d = 2 the d2_* fields carry the verdict.
  bool conclusive = false;
  std::optional<double> d2_mu_max;
  std::optional<bool> d2_ok;
};

ThresholdReport threshold_report(std::span<const double> lambdas, const GramSet& grams);

}  // namespace spikedet
