#pragma once

// Independent reference computations for tests. Nothing here calls the
// library routine it is used to check.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "spikedet/random.hpp"
#include "spikedet/spike_model.hpp"
#include "spikedet/tensor.hpp"

namespace spikedet::testing {

/// min over a uniform grid of `points` interior points of -log1p(-u^2)/u^d,
/// then sqrt.
inline double grid_beta(int d, std::size_t points = 1'000'000) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= points; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(points + 1);
    const double f = -std::log1p(-u * u) / std::pow(u, d);
    if (f < best) best = f;
  }
  return std::sqrt(best);
}

/// Spike entries by enumeration of every multi-index.
inline std::vector<cplx> spike_entries_by_enumeration(const SpikeSpec& spec) {
  std::size_t total = 1;
  for (int k = 0; k < spec.d; ++k) total *= static_cast<std::size_t>(spec.n);
  std::vector<cplx> out(total);
  std::vector<int> idx(static_cast<std::size_t>(spec.d));
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t rem = f;
    for (int k = spec.d - 1; k >= 0; --k) {
      idx[static_cast<std::size_t>(k)] = static_cast<int>(rem % static_cast<std::size_t>(spec.n));
      rem /= static_cast<std::size_t>(spec.n);
    }
    cplx acc{0.0, 0.0};
    for (int i = 0; i < spec.r; ++i) {
      cplx term{spec.lambdas[static_cast<std::size_t>(i)], 0.0};
      for (int k = 0; k < spec.d; ++k) {
        term *= spec.factors[static_cast<std::size_t>(k)](idx[static_cast<std::size_t>(k)], i);
      }
      acc += term;
    }
    out[f] = acc;
  }
  return out;
}

inline double sum_sq(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const cplx& z : v) s += std::norm(z);
  return s;
}

/// Largest eigenvalue of X0 X0* for d = 2 from the assembled n x n matrix.
inline double brute_mu_max(const SpikeSpec& spec) {
  const auto entries = spike_entries_by_enumeration(spec);
  CMatrix x(spec.n, spec.n);
  for (int a = 0; a < spec.n; ++a) {
    for (int b = 0; b < spec.n; ++b) x(a, b) = entries[static_cast<std::size_t>(a * spec.n + b)];
  }
  const CMatrix xx = x * x.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(xx);
  return eig.eigenvalues().maxCoeff();
}

template <class F>
double central_difference(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Random spike for property tests: d in [2, dmax], r in [1, rmax],
/// n in [r, nmax], Grams of r random unit vectors in C^m with m in [1, r+2].
inline SpikeSpec random_spec(Rng& rng, int dmax, int rmax, int nmax, double lam_lo = 0.1,
                             double lam_hi = 1.5) {
  auto pick = [&](int lo, int hi) {
    return lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  const int d = pick(2, dmax);
  const int r = pick(1, rmax);
  const int n = pick(r, nmax);
  GramSet grams;
  for (int k = 0; k < d; ++k) grams.grams.push_back(random_gram(r, pick(1, r + 2), rng));
  std::vector<double> lambdas;
  for (int i = 0; i < r; ++i) lambdas.push_back(lam_lo + (lam_hi - lam_lo) * rng.uniform());
  return make_spike(std::move(lambdas), grams, n, &rng);
}

inline ComplexTensor random_tensor(int d, int n, Rng& rng) {
  ComplexTensor t(d, n);
  for (cplx& v : t.entries()) v = rng.complex_normal(1.0);
  return t;
}

/// Two-sample z statistic for a difference of means.
inline double two_sample_z(const std::vector<double>& a, const std::vector<double>& b) {
  auto stats = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::pair{m, s / static_cast<double>(v.size() - 1)};
  };
  const auto [ma, va] = stats(a);
  const auto [mb, vb] = stats(b);
  return (ma - mb) / std::sqrt(va / static_cast<double>(a.size()) + vb / static_cast<double>(b.size()));
}

struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
};

inline SampleStats sample_stats(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  s /= static_cast<double>(v.size() - 1);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

}  // namespace spikedet::testing
