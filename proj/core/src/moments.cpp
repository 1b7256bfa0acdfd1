#include "spikedet/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "spikedet/error.hpp"
#include "spikedet/eta.hpp"

namespace spikedet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct HaarBatch {
  ExpAccumulator total;
  ExpAccumulator above;  // η > ε
  ExpAccumulator below;  // η <= ε
};

// Shared sampling loop of second_moment_haar_mc and e1_e2_split: the total
// accumulator sees the identical sequence of values in both.
std::vector<HaarBatch> run_haar_batches(const SpikeSpec& spec, std::size_t samples, SeedSpec seed,
                                        double epsilon, unsigned threads) {
  spec.validate(AmplitudePolicy::AllowZero);
  if (samples < 2) throw ParameterError("second moment estimation needs samples >= 2");
  const BatchPlan plan = BatchPlan::make(samples);
  std::vector<HaarBatch> batches(plan.batches);
  const double two_n = 2.0 * spec.n;
  parallel_for(plan.batches, threads, [&](std::size_t b) {
    Rng rng(seed.child(b));
    HaarBatch& out = batches[b];
    std::vector<CMatrix> thetas(static_cast<std::size_t>(spec.d));
    for (std::size_t s = 0; s < plan.size(b); ++s) {
      for (auto& theta : thetas) theta = sample_haar_unitary(spec.n, rng);
      const double eta = eta_expanded_unchecked(spec, thetas);
      const double a = two_n * eta;
      out.total.add(a);
      if (eta > epsilon) {
        out.above.add(a);
        out.below.skip();
      } else {
        out.above.skip();
        out.below.add(a);
      }
    }
  });
  return batches;
}

template <class Member>
MCEstimate collect(const std::vector<HaarBatch>& batches, Member member, SeedSpec seed) {
  std::vector<ExpAccumulator> accs;
  accs.reserve(batches.size());
  for (const HaarBatch& b : batches) accs.push_back(b.*member);
  return estimate_from_batches(accs, seed);
}

double log_weight(const ComplexTensor& y, const ComplexTensor& x, int n) {
  const double dn = static_cast<double>(n);
  const double norm_sq = frobenius_inner(x, x).real();
  return 2.0 * dn * frobenius_inner(y, x).real() - dn * norm_sq;
}

ComplexTensor draw_spike(const SpikeSpec& spec, Rng& rng, SpikePrior prior) {
  return prior == SpikePrior::HaarRotated ? build_spike(rotate_spike(spec, rng)) : build_spike(spec);
}

ExpAccumulator likelihood_terms(const ComplexTensor& y, const SpikeSpec& spec, std::size_t inner,
                                Rng& rng, SpikePrior prior) {
  if (inner < 1) throw ParameterError("likelihood ratio estimation needs inner >= 1");
  if (y.order() != spec.d || y.dim() != spec.n) {
    throw DimensionError("likelihood ratio: observation shape does not match the spike");
  }
  ExpAccumulator acc;
  if (prior == SpikePrior::Fixed) {
    // Every inner draw would be the same tensor.
    const double a = log_weight(y, build_spike(spec), spec.n);
    for (std::size_t j = 0; j < inner; ++j) acc.add(a);
    return acc;
  }
  for (std::size_t j = 0; j < inner; ++j) acc.add(log_weight(y, draw_spike(spec, rng, prior), spec.n));
  return acc;
}

// (a, b) with a + b == total in double arithmetic, a within a few ulps of e1.
std::pair<double, double> exact_partition(double e1, double total) {
  // Offsets 0, +1, -1, +2, -2, ... ulps from e1.
  for (int k = 0; k < 16; ++k) {
    const int steps = (k + 1) / 2;
    double a = e1;
    for (int s = 0; s < steps; ++s) a = std::nextafter(a, k % 2 == 1 ? kInf : -kInf);
    double b = total - a;
    for (int i = 0; i < 4 && a + b != total; ++i) b = std::nextafter(b, a + b < total ? kInf : -kInf);
    if (a + b == total) return {a, b};
  }
  return {e1, total - e1};
}

}  // namespace

MCEstimate second_moment_haar_mc(const SpikeSpec& spec, std::size_t samples, SeedSpec seed,
                                 unsigned threads) {
  const auto batches = run_haar_batches(spec, samples, seed, kInf, threads);
  return collect(batches, &HaarBatch::total, seed);
}

SplitEstimate e1_e2_split(const SpikeSpec& spec, double epsilon, std::size_t samples,
                          SeedSpec seed, unsigned threads) {
  if (!(epsilon > 0.0)) throw ParameterError("e1_e2_split: epsilon must be > 0");
  const auto batches = run_haar_batches(spec, samples, seed, epsilon, threads);
  SplitEstimate out;
  out.epsilon = epsilon;
  out.total = collect(batches, &HaarBatch::total, seed);
  out.e1 = collect(batches, &HaarBatch::above, seed);
  out.e2 = collect(batches, &HaarBatch::below, seed);
  // Report E2 as the complement of E1 in the total so the partition holds
  // exactly. Round-to-even ties can make that unreachable for a given E1,
  // in which case E1 moves by a few ulps too.
  const double target = out.total.mean;
  if (std::isfinite(target) && std::isfinite(out.e1.mean)) {
    const auto [e1, e2] = exact_partition(out.e1.mean, target);
    out.e1.mean = e1;
    out.e2.mean = e2;
  }
  return out;
}

double default_split_epsilon(const SpikeSpec& spec) {
  const GramSet grams = gram_set(spec);
  const double emax = eta_max(spec.lambdas, grams);
  double max_pair = 0.0;
  for (double a : spec.lambdas) {
    for (double b : spec.lambdas) max_pair = std::max(max_pair, a * b);
  }
  return std::min(emax / 4.0, static_cast<double>(spec.r) * spec.r * max_pair);
}

MCEstimate second_moment_direct_mc(const SpikeSpec& spec, std::size_t outer, std::size_t inner,
                                   SeedSpec seed, SpikePrior prior, unsigned threads) {
  spec.validate(AmplitudePolicy::AllowZero);
  if (outer < 2 || inner < 1) {
    throw ParameterError("second_moment_direct_mc: need outer >= 2 and inner >= 1");
  }
  const BatchPlan plan = BatchPlan::make(outer);
  std::vector<ExpAccumulator> batches(plan.batches);
  parallel_for(plan.batches, threads, [&](std::size_t b) {
    Rng rng(seed.child(b));
    for (std::size_t s = 0; s < plan.size(b); ++s) {
      const ComplexTensor y = sample_gaussian_tensor(spec.n, spec.d, rng);
      const ExpAccumulator lr = likelihood_terms(y, spec, inner, rng, prior);
      // Λ̂^2 in the log domain.
      batches[b].add(2.0 * lr.log_mean());
    }
  });
  return estimate_from_batches(batches, seed);
}

double xi_tail_probability(double t, int n) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ParameterError("xi_tail_probability: t must lie in [0, 1], got " + std::to_string(t));
  }
  if (n < 2) throw ParameterError("xi_tail_probability: n must be >= 2");
  return std::pow(1.0 - t * t, n - 1);
}

MCEstimate xi_empirical_tail(int n, double t, std::size_t samples, SeedSpec seed) {
  xi_tail_probability(t, n);
  if (samples < 1) throw ParameterError("xi_empirical_tail: samples must be >= 1");
  Rng rng(seed);
  double hits = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const CVector v = sample_unit_sphere(n, rng);
    if (std::abs(v(0)) >= t) hits += 1.0;
  }
  // Indicator: sum of squares equals the sum.
  return estimate_from_moments(samples, hits, hits, seed);
}

SpikeSpec rotate_spike(const SpikeSpec& spec, Rng& rng) {
  SpikeSpec out = spec;
  for (CMatrix& chi : out.factors) chi = sample_haar_unitary(spec.n, rng) * chi;
  return out;
}

HypothesisSample simulate_observation(const SpikeSpec& spec, Hypothesis hypothesis, Rng& rng,
                                      SpikePrior prior) {
  spec.validate(AmplitudePolicy::AllowZero);
  ComplexTensor z = sample_gaussian_tensor(spec.n, spec.d, rng);
  if (hypothesis == Hypothesis::H0) return HypothesisSample{std::move(z), Hypothesis::H0, std::nullopt};
  SpikeSpec used = prior == SpikePrior::HaarRotated ? rotate_spike(spec, rng) : spec;
  ComplexTensor y = build_spike(used) + z;
  return HypothesisSample{std::move(y), Hypothesis::H1, std::move(used)};
}

double log_lr_mc(const ComplexTensor& y, const SpikeSpec& spec, std::size_t inner, Rng& rng,
                 SpikePrior prior) {
  spec.validate(AmplitudePolicy::AllowZero);
  return likelihood_terms(y, spec, inner, rng, prior).log_mean();
}

MCEstimate likelihood_ratio_mean(const SpikeSpec& spec, std::size_t draws, std::size_t inner,
                                 SeedSpec seed, SpikePrior prior, unsigned threads) {
  spec.validate(AmplitudePolicy::AllowZero);
  if (draws < 2) throw ParameterError("likelihood_ratio_mean: draws must be >= 2");
  const BatchPlan plan = BatchPlan::make(draws);
  std::vector<ExpAccumulator> batches(plan.batches);
  parallel_for(plan.batches, threads, [&](std::size_t b) {
    Rng rng(seed.child(b));
    for (std::size_t s = 0; s < plan.size(b); ++s) {
      const ComplexTensor y = sample_gaussian_tensor(spec.n, spec.d, rng);
      batches[b].add(likelihood_terms(y, spec, inner, rng, prior).log_mean());
    }
  });
  return estimate_from_batches(batches, seed);
}

RocCurve roc_from_scores(std::vector<double> h0_scores, std::vector<double> h1_scores) {
  if (h0_scores.empty() || h1_scores.empty()) throw ParameterError("roc: empty score sample");
  std::sort(h0_scores.begin(), h0_scores.end(), std::greater<>());
  std::sort(h1_scores.begin(), h1_scores.end(), std::greater<>());
  std::vector<double> thresholds;
  thresholds.reserve(h0_scores.size() + h1_scores.size());
  std::merge(h0_scores.begin(), h0_scores.end(), h1_scores.begin(), h1_scores.end(),
             std::back_inserter(thresholds), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  RocCurve roc;
  roc.trials = h0_scores.size();
  roc.points.push_back({kInf, 0.0, 0.0});
  const double n0 = static_cast<double>(h0_scores.size());
  const double n1 = static_cast<double>(h1_scores.size());
  std::size_t i0 = 0;
  std::size_t i1 = 0;
  for (double t : thresholds) {
    while (i0 < h0_scores.size() && h0_scores[i0] >= t) ++i0;
    while (i1 < h1_scores.size() && h1_scores[i1] >= t) ++i1;
    const RocPoint p{t, static_cast<double>(i0) / n0, static_cast<double>(i1) / n1};
    roc.tv_proxy = std::max(roc.tv_proxy, std::abs(p.tpr - p.fpr));
    roc.points.push_back(p);
  }
  return roc;
}

RocCurve roc_experiment(const SpikeSpec& spec, std::size_t trials, std::size_t inner,
                        SeedSpec seed, unsigned threads, SpikePrior prior) {
  spec.validate(AmplitudePolicy::AllowZero);
  if (trials < 1) throw ParameterError("roc_experiment: trials must be >= 1");
  std::vector<double> h0(trials);
  std::vector<double> h1(trials);
  // One stream per (hypothesis, trial) pair.
  parallel_for(2 * trials, threads, [&](std::size_t job) {
    const bool alt = job >= trials;
    const std::size_t t = alt ? job - trials : job;
    Rng rng(seed.child(job));
    const HypothesisSample obs =
        simulate_observation(spec, alt ? Hypothesis::H1 : Hypothesis::H0, rng, prior);
    const double score = log_lr_mc(obs.tensor, spec, inner, rng, prior);
    (alt ? h1 : h0)[t] = score;
  });
  RocCurve roc = roc_from_scores(std::move(h0), std::move(h1));
  roc.trials = trials;
  return roc;
}

}  // namespace spikedet
