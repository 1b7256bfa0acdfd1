#include "spikedet/thresholds.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "spikedet/error.hpp"
#include "spikedet/golden_section.hpp"

namespace spikedet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_order(int d) {
  if (d < 2) throw ParameterError("order d must be >= 2, got " + std::to_string(d));
}

struct Minimum {
  double u = 0.0;
  double value = kInf;
};

Minimum minimize_objective(int d, double tol, int grid_points) {
  require_order(d);
  if (grid_points < 3) throw ParameterError("beta_d_second: need at least 3 grid points");
  // The u -> 0 limit is an admissible candidate (finite only for d = 2).
  Minimum best{0.0, beta_objective(0.0, d)};
  Minimum grid;
  int best_index = -1;
  const double step = 1.0 / (grid_points + 1);
  for (int i = 1; i <= grid_points; ++i) {
    const double u = i * step;
    const double f = beta_objective(u, d);
    if (f < grid.value) {
      grid = {u, f};
      best_index = i;
    }
  }
  if (best_index > 0) {
    const double lo = (best_index - 1) * step;
    const double hi = (best_index + 1) * step;
    const auto f = [d](double u) { return beta_objective(u, d); };
    const double u = golden_section_minimize(f, lo, hi, tol);
    const double fu = beta_objective(u, d);
    if (fu < grid.value) grid = {u, fu};
  }
  if (grid.value < best.value) best = grid;
  return best;
}

double sum_of(std::span<const double> lambdas) {
  return std::accumulate(lambdas.begin(), lambdas.end(), 0.0);
}

}  // namespace

double beta_objective(double u, int d) {
  require_order(d);
  if (u <= 0.0) return d == 2 ? 1.0 : kInf;
  if (u >= 1.0) return kInf;
  return -std::log1p(-u * u) / std::pow(u, d);
}

double beta_d_second(int d, double tol, int grid_points) {
  return std::sqrt(minimize_objective(d, tol, grid_points).value);
}

double beta_d_minimizer(int d, double tol, int grid_points) {
  return minimize_objective(d, tol, grid_points).u;
}

double detection_scale(int d) { return std::sqrt(d / 2.0) * beta_d_second(d); }

ConditionResult hoelder_condition(std::span<const double> lambdas, int d) {
  const double scale = detection_scale(d);
  const double total = sum_of(lambdas);
  return {total < scale, scale - total};
}

ConditionResult main_condition(std::span<const double> lambdas, const GramSet& grams, int d) {
  if (grams.order() != d) {
    throw DimensionError("main_condition: " + std::to_string(grams.order()) +
                         " Grams for order " + std::to_string(d));
  }
  const double scale = detection_scale(d);
  const double root = std::sqrt(eta_max(lambdas, grams));
  return {root < scale, scale - root};
}

double matrix_case_mu_max(std::span<const double> lambdas, const GramSet& grams) {
  if (grams.order() != 2) {
    throw ParameterError("matrix_case_mu_max requires d = 2, got d = " +
                         std::to_string(grams.order()));
  }
  grams.validate();
  const Eigen::Index r = grams.rank();
  if (static_cast<Eigen::Index>(lambdas.size()) != r) {
    throw DimensionError("matrix_case_mu_max: amplitude count does not match rank");
  }
  CMatrix lam = CMatrix::Zero(r, r);
  for (Eigen::Index i = 0; i < r; ++i) lam(i, i) = lambdas[static_cast<std::size_t>(i)];
  // X0 = χ1 Λ χ2^T, so X0 X0* shares its nonzero spectrum with Λ conj(G2) Λ G1.
  const CMatrix product = lam * grams.grams[1].conjugate() * lam * grams.grams[0];
  Eigen::ComplexEigenSolver<CMatrix> solver(product, false);
  double mu = 0.0;
  for (Eigen::Index i = 0; i < r; ++i) mu = std::max(mu, solver.eigenvalues()(i).real());
  return mu;
}

double matrix_case_mu_max(const SpikeSpec& spec) {
  if (spec.d != 2) {
    throw ParameterError("matrix_case_mu_max requires d = 2, got d = " + std::to_string(spec.d));
  }
  return matrix_case_mu_max(spec.lambdas, gram_set(spec));
}

ThresholdReport threshold_report(std::span<const double> lambdas, const GramSet& grams) {
  grams.validate();
  ThresholdReport report;
  report.d = grams.order();
  report.beta_d = beta_d_second(report.d);
  report.sum_lambda = sum_of(lambdas);
  report.eta_max = eta_max(lambdas, grams);
  const auto hoelder = hoelder_condition(lambdas, report.d);
  const auto main = main_condition(lambdas, grams, report.d);
  report.hoelder_ok = hoelder.ok;
  report.hoelder_margin = hoelder.margin;
  report.main_ok = main.ok;
  report.main_margin = main.margin;
  report.conclusive = report.d > 2;
  if (report.d == 2) {
    const double mu = matrix_case_mu_max(lambdas, grams);
    report.d2_mu_max = mu;
    report.d2_ok = mu < report.beta_d;
  }
  return report;
}

}  // namespace spikedet
