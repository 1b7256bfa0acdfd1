#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "spikedet/error.hpp"
#include "spikedet/moments.hpp"
#include "spikedet/monte_carlo.hpp"
#include "spikedet/random.hpp"
#include "support/oracles.hpp"

namespace spikedet {
namespace {

SpikeSpec null_spec(int d, int n, int r) {
  Rng rng({40, 0});
  return make_spike(std::vector<double>(static_cast<std::size_t>(r), 0.0), repeat_gram(identity_gram(r), d),
                    n, &rng, AmplitudePolicy::AllowZero);
}

TEST(ExpAccumulator, ConstantValuesAreExact) {
  ExpAccumulator acc;
  for (int i = 0; i < 1000; ++i) acc.add(0.0);
  EXPECT_EQ(acc.mean(), 1.0);
  EXPECT_EQ(acc.log_mean(), 0.0);
  ExpAccumulator empty;
  EXPECT_EQ(empty.mean(), 0.0);
  EXPECT_EQ(empty.log_mean(), -std::numeric_limits<double>::infinity());
}

TEST(ExpAccumulator, SkipAndMerge) {
  ExpAccumulator a;
  a.add(std::log(3.0));
  a.skip();
  EXPECT_NEAR(a.mean(), 1.5, 1e-15);
  ExpAccumulator b;
  b.add(std::log(5.0));
  a.merge(b);
  EXPECT_EQ(a.count(), 3u);
  EXPECT_NEAR(a.mean(), 8.0 / 3.0, 1e-15);
}

TEST(ExpAccumulator, HugeExponentsStayFinite) {
  ExpAccumulator acc;
  acc.add(1000.0);
  acc.add(1000.0 + std::log(3.0));
  EXPECT_TRUE(std::isinf(acc.mean()));
  EXPECT_NEAR(acc.log_mean(), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_EQ(acc.max_log_value(), 1000.0 + std::log(3.0));
}

TEST(BatchPlan, PartitionsSamples) {
  for (std::size_t total : {2u, 31u, 32u, 33u, 1000u}) {
    const BatchPlan plan = BatchPlan::make(total);
    EXPECT_EQ(plan.batches, std::min<std::size_t>(total, kDefaultBatches));
    std::size_t sum = 0;
    for (std::size_t b = 0; b < plan.batches; ++b) {
      EXPECT_GE(plan.size(b), 1u);
      sum += plan.size(b);
    }
    EXPECT_EQ(sum, total);
  }
}

TEST(ParallelFor, RunsEveryIndexAndRethrows) {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw ParameterError("boom");
                            }),
               ParameterError);
}

TEST(SecondMomentHaar, NullModelIsExactlyOne) {
  const auto est = second_moment_haar_mc(null_spec(3, 4, 2), 500, {41, 0});
  EXPECT_EQ(est.mean, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
  EXPECT_EQ(est.log_domain_max, 0.0);
  EXPECT_EQ(est.count, 500u);
}

TEST(SecondMomentHaar, ExponentBoundedByEtaMax) {
  Rng rng({42, 0});
  for (int trial = 0; trial < 5; ++trial) {
    const auto spec = testing::random_spec(rng, 3, 2, 4);
    const double emax = eta_max(spec.lambdas, gram_set(spec));
    const auto est = second_moment_haar_mc(spec, 2000, {42, static_cast<std::uint64_t>(trial)});
    EXPECT_LE(est.log_domain_max, 2.0 * spec.n * emax + 1e-9);
    EXPECT_GE(est.mean, 0.0);
    EXPECT_GT(est.std_error, 0.0);
  }
}

TEST(SecondMomentHaar, RankOneMatchesSphereCoordinates) {
  // For r = 1, <Θx, x> has the law of the first coordinate of a uniform
  // unit vector, so E exp(2n λ^2 Re Π_k v_k1) is an independent oracle.
  const int n = 3;
  const int d = 3;
  const double lambda = 0.9;
  Rng rng({43, 0});
  const auto spec = make_spike({lambda}, repeat_gram(identity_gram(1), d), n, &rng);
  const auto est = second_moment_haar_mc(spec, 40000, {43, 1});

  Rng oracle({43, 2});
  std::vector<double> values;
  for (int s = 0; s < 40000; ++s) {
    cplx prod{1.0, 0.0};
    for (int k = 0; k < d; ++k) prod *= sample_unit_sphere(n, oracle)(0);
    values.push_back(std::exp(2.0 * n * lambda * lambda * prod.real()));
  }
  const auto ref = testing::sample_stats(values);
  const double z = (est.mean - ref.mean) / std::hypot(est.std_error, ref.std_error);
  EXPECT_LT(std::abs(z), 3.5) << est.mean << " vs " << ref.mean;
}

TEST(SecondMomentHaar, IndependentOfThreadCount) {
  Rng rng({44, 0});
  const auto spec = testing::random_spec(rng, 3, 2, 4);
  const auto a = second_moment_haar_mc(spec, 3000, {44, 1}, 1);
  const auto b = second_moment_haar_mc(spec, 3000, {44, 1}, 4);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.log_domain_max, b.log_domain_max);
}

TEST(SecondMomentHaar, RejectsTooFewSamples) {
  EXPECT_THROW(second_moment_haar_mc(null_spec(2, 2, 1), 1, {1, 0}), ParameterError);
}

TEST(SecondMomentDirect, FixedPriorClosedForm) {
  // Fixed X: E_0 Λ^2 = exp(2n ||X||^2) with inner = 1 exact.
  const auto spec = make_spike({0.3}, repeat_gram(identity_gram(1), 2), 4);
  const auto est = second_moment_direct_mc(spec, 40000, 1, {45, 0}, SpikePrior::Fixed);
  EXPECT_NEAR(est.mean, std::exp(0.72), 4.0 * est.std_error);
  EXPECT_LT(est.std_error, 0.1);
}

TEST(SecondMomentDirect, NullModelIsExactlyOne) {
  const auto est = second_moment_direct_mc(null_spec(2, 3, 1), 100, 3, {46, 0});
  EXPECT_EQ(est.mean, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(Split, PartitionIsExactAndTotalMatchesHaar) {
  Rng rng({47, 0});
  for (int trial = 0; trial < 5; ++trial) {
    const auto spec = testing::random_spec(rng, 3, 3, 4);
    const SeedSpec seed{47, static_cast<std::uint64_t>(trial)};
    const double eps = default_split_epsilon(spec);
    const auto split = e1_e2_split(spec, eps, 1000, seed);
    const auto haar = second_moment_haar_mc(spec, 1000, seed);
    EXPECT_EQ(split.e1.mean + split.e2.mean, split.total.mean);
    EXPECT_EQ(split.total.mean, haar.mean);
    EXPECT_EQ(split.total.std_error, haar.std_error);
    EXPECT_GE(split.e1.mean, 0.0);
    EXPECT_GE(split.e2.mean, 0.0);
  }
}

TEST(Split, EpsilonAboveEtaMaxEmptiesE1) {
  Rng rng({48, 0});
  const auto spec = testing::random_spec(rng, 3, 2, 4);
  const double emax = eta_max(spec.lambdas, gram_set(spec));
  const auto split = e1_e2_split(spec, emax * 1.0001, 500, {48, 1});
  EXPECT_EQ(split.e1.mean, 0.0);
  EXPECT_EQ(split.e2.mean, split.total.mean);
}

TEST(Split, E1DecreasesWithEpsilon) {
  Rng rng({49, 0});
  const auto spec = make_spike({1.0, 0.7}, repeat_gram(identity_gram(2), 3), 3, &rng);
  const double emax = eta_max(spec.lambdas, gram_set(spec));
  double previous = std::numeric_limits<double>::infinity();
  for (double frac : {0.01, 0.05, 0.1, 0.3, 0.6}) {
    const auto split = e1_e2_split(spec, frac * emax, 2000, {49, 1});
    EXPECT_LE(split.e1.mean, previous);
    previous = split.e1.mean;
  }
  EXPECT_THROW(e1_e2_split(spec, 0.0, 100, {49, 1}), ParameterError);
}

TEST(Split, DefaultEpsilon) {
  const auto spec = make_spike({1.0, 0.5}, repeat_gram(identity_gram(2), 3), 3);
  EXPECT_NEAR(default_split_epsilon(spec), 1.25 / 4.0, 1e-15);
}

TEST(XiTail, ClosedForm) {
  EXPECT_EQ(xi_tail_probability(0.0, 5), 1.0);
  EXPECT_EQ(xi_tail_probability(1.0, 5), 0.0);
  EXPECT_NEAR(xi_tail_probability(0.5, 3), 0.5625, 1e-15);
  EXPECT_THROW(xi_tail_probability(-0.1, 3), ParameterError);
  EXPECT_THROW(xi_tail_probability(1.1, 3), ParameterError);
  EXPECT_THROW(xi_tail_probability(0.5, 1), ParameterError);
  EXPECT_THROW(xi_tail_probability(std::nan(""), 3), ParameterError);
}

TEST(XiTail, EmpiricalMatchesClosedForm) {
  for (int n : {2, 4, 8}) {
    for (double t : {0.1, 0.4, 0.7}) {
      const auto est = xi_empirical_tail(n, t, 20000, {50, static_cast<std::uint64_t>(n)});
      const double p = xi_tail_probability(t, n);
      EXPECT_NEAR(est.mean, p, 4.5 * std::sqrt(p * (1.0 - p) / 20000.0) + 1e-12) << n << " " << t;
    }
  }
}

TEST(XiTail, StandardErrorShrinksWithSamples) {
  const auto a = xi_empirical_tail(4, 0.4, 2000, {51, 0});
  const auto b = xi_empirical_tail(4, 0.4, 32000, {51, 0});
  EXPECT_NEAR(a.std_error / b.std_error, 4.0, 0.6);
}

TEST(SimulateObservation, ShapesAndLabels) {
  Rng rng({52, 0});
  const auto spec = make_spike({1.0}, repeat_gram(identity_gram(1), 3), 3, &rng);
  const auto h0 = simulate_observation(spec, Hypothesis::H0, rng);
  EXPECT_EQ(h0.hypothesis, Hypothesis::H0);
  EXPECT_FALSE(h0.spike_used.has_value());
  EXPECT_EQ(h0.tensor.size(), 27u);
  const auto h1 = simulate_observation(spec, Hypothesis::H1, rng);
  ASSERT_TRUE(h1.spike_used.has_value());
  EXPECT_NO_THROW(h1.spike_used->validate());
}

TEST(SimulateObservation, SpikeIsAddedToTheSameNoise) {
  Rng rng({53, 0});
  const auto spec = make_spike({0.8, 0.4}, repeat_gram(identity_gram(2), 3), 3, &rng);
  Rng a({53, 1});
  Rng b({53, 1});
  const auto h0 = simulate_observation(spec, Hypothesis::H0, a, SpikePrior::Fixed);
  const auto h1 = simulate_observation(spec, Hypothesis::H1, b, SpikePrior::Fixed);
  const ComplexTensor diff = h1.tensor + (-1.0) * h0.tensor;
  const ComplexTensor x = build_spike(spec);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(std::abs(diff[i] - x[i]), 0.0, 1e-14);

  const auto zero = null_spec(3, 3, 1);
  Rng c({53, 2});
  Rng e({53, 2});
  const auto n0 = simulate_observation(zero, Hypothesis::H0, c);
  const auto n1 = simulate_observation(zero, Hypothesis::H1, e);
  for (std::size_t i = 0; i < n0.tensor.size(); ++i) EXPECT_EQ(n0.tensor[i], n1.tensor[i]);
}

TEST(LogLikelihoodRatio, NullSpikeIsZero) {
  Rng rng({54, 0});
  const auto y = testing::random_tensor(3, 3, rng);
  EXPECT_EQ(log_lr_mc(y, null_spec(3, 3, 2), 10, rng), 0.0);
}

TEST(LogLikelihoodRatio, FixedPriorClosedForm) {
  Rng rng({55, 0});
  const auto spec = make_spike({0.6, 0.3}, repeat_gram(identity_gram(2), 3), 4, &rng);
  const auto y = testing::random_tensor(3, 4, rng);
  const ComplexTensor x = build_spike(spec);
  const double expected = 2.0 * 4 * frobenius_inner(y, x).real() - 4 * frobenius_norm(x) * frobenius_norm(x);
  EXPECT_NEAR(log_lr_mc(y, spec, 7, rng, SpikePrior::Fixed), expected, 1e-12 * (1.0 + std::abs(expected)));
}

TEST(LogLikelihoodRatio, MeanUnderNullIsOne) {
  Rng rng({56, 0});
  const auto spec = make_spike({0.5}, repeat_gram(identity_gram(1), 3), 3, &rng);
  const auto est = likelihood_ratio_mean(spec, 20000, 4, {56, 1});
  EXPECT_NEAR(est.mean, 1.0, 4.0 * est.std_error);
  const auto fixed = likelihood_ratio_mean(spec, 20000, 1, {56, 2}, SpikePrior::Fixed);
  EXPECT_NEAR(fixed.mean, 1.0, 4.0 * fixed.std_error);
}

TEST(Roc, FromScores) {
  const auto roc = roc_from_scores({0.1, 0.2, 0.3}, {0.25, 0.4, 0.5});
  EXPECT_TRUE(std::isinf(roc.points.front().threshold));
  EXPECT_EQ(roc.points.front().fpr, 0.0);
  EXPECT_EQ(roc.points.back().fpr, 1.0);
  EXPECT_EQ(roc.points.back().tpr, 1.0);
  EXPECT_NEAR(roc.tv_proxy, 2.0 / 3.0, 1e-15);
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    EXPECT_GE(roc.points[i].fpr, roc.points[i - 1].fpr);
    EXPECT_GE(roc.points[i].tpr, roc.points[i - 1].tpr);
  }
  EXPECT_THROW(roc_from_scores({}, {1.0}), ParameterError);
}

TEST(Roc, NullModelHasNoPower) {
  const auto roc = roc_experiment(null_spec(3, 3, 1), 200, 4, {57, 0});
  EXPECT_EQ(roc.tv_proxy, 0.0);
}

TEST(Roc, StrongSpikeIsDetected) {
  Rng rng({58, 0});
  const auto spec = make_spike({4.0}, repeat_gram(identity_gram(1), 3), 3, &rng);
  const auto roc = roc_experiment(spec, 200, 1, {58, 1}, 2, SpikePrior::Fixed);
  EXPECT_GT(roc.tv_proxy, 0.95);
}

TEST(Roc, IndependentOfThreadCount) {
  Rng rng({59, 0});
  const auto spec = make_spike({1.5}, repeat_gram(identity_gram(1), 3), 3, &rng);
  const auto a = roc_experiment(spec, 100, 4, {59, 1}, 1);
  const auto b = roc_experiment(spec, 100, 4, {59, 1}, 3);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].threshold, b.points[i].threshold);
    EXPECT_EQ(a.points[i].tpr, b.points[i].tpr);
  }
}

}  // namespace
}  // namespace spikedet
