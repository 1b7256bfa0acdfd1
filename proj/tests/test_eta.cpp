#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "spikedet/error.hpp"
#include "spikedet/eta.hpp"
#include "spikedet/random.hpp"
#include "support/oracles.hpp"

namespace spikedet {
namespace {

ModeOperators haar_operators(int d, int n, Rng& rng) {
  std::vector<CMatrix> thetas;
  for (int k = 0; k < d; ++k) thetas.push_back(sample_haar_unitary(n, rng));
  return ModeOperators(std::move(thetas));
}

TEST(EtaExpanded, IdentityOperatorsGiveEtaMax) {
  Rng rng({20, 0});
  for (int trial = 0; trial < 100; ++trial) {
    const auto spec = testing::random_spec(rng, 4, 3, 5);
    const double expected = eta_max(spec.lambdas, gram_set(spec));
    EXPECT_NEAR(eta_expanded(spec, ModeOperators::identity(spec.d, spec.n)), expected,
                1e-12 * (1.0 + expected));
  }
}

TEST(EtaExpanded, RankOneIsProductOfInnerProducts) {
  Rng rng({21, 0});
  const auto spec = make_spike({0.8}, repeat_gram(identity_gram(1), 3), 4, &rng);
  const auto thetas = haar_operators(3, 4, rng);
  cplx prod{1.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    const CVector x = spec.factors[static_cast<std::size_t>(k)].col(0);
    prod *= x.dot(thetas.matrices()[static_cast<std::size_t>(k)] * x);
  }
  EXPECT_NEAR(eta_expanded(spec, thetas), 0.64 * prod.real(), 1e-13);
}

TEST(EtaExpanded, BoundedByEtaMax) {
  Rng rng({22, 0});
  for (int trial = 0; trial < 500; ++trial) {
    const auto spec = testing::random_spec(rng, 4, 3, 5);
    const double emax = eta_max(spec.lambdas, gram_set(spec));
    EXPECT_LE(std::abs(eta_expanded(spec, haar_operators(spec.d, spec.n, rng))), emax + 1e-12);
  }
}

TEST(EtaExpanded, RejectsShapeMismatch) {
  const auto spec = make_spike({0.8}, repeat_gram(identity_gram(1), 3), 4);
  EXPECT_THROW(eta_expanded(spec, ModeOperators::identity(2, 4)), DimensionError);
  EXPECT_THROW(eta_expanded(spec, ModeOperators::identity(3, 5)), DimensionError);
}

TEST(EtaHadamard, ZeroAndIdentityBlocks) {
  Rng rng({23, 0});
  for (int trial = 0; trial < 50; ++trial) {
    const auto spec = testing::random_spec(rng, 4, 3, 5);
    const auto grams = gram_set(spec);
    const auto svd = spike_svd(grams);
    std::vector<CMatrix> zeros(static_cast<std::size_t>(spec.d), CMatrix::Zero(spec.r, spec.r));
    std::vector<CMatrix> ids(static_cast<std::size_t>(spec.d), CMatrix::Identity(spec.r, spec.r));
    EXPECT_EQ(eta_hadamard(spec.lambdas, svd, PsiSet::from_blocks(zeros)), 0.0);
    const double emax = eta_max(spec.lambdas, grams);
    EXPECT_NEAR(eta_hadamard(spec.lambdas, svd, PsiSet::from_blocks(ids)), emax, 1e-10 * (1.0 + emax));
  }
}

TEST(EtaHadamard, MatchesExpandedFormThroughPsiBlocks) {
  Rng rng({24, 0});
  for (int trial = 0; trial < 300; ++trial) {
    const auto spec = testing::random_spec(rng, 4, 3, 6);
    const auto svd = spike_svd(spec);
    const auto thetas = haar_operators(spec.d, spec.n, rng);
    const double expanded = eta_expanded(spec, thetas);
    const PsiSet psis = psi_blocks_from_operators(spec, svd, thetas);
    EXPECT_NO_THROW(psis.validate());
    EXPECT_NEAR(eta_hadamard(spec.lambdas, svd, psis), expanded, 1e-9 * (1.0 + std::abs(expanded)));
  }
}

TEST(PsiSet, ValidateRejectsLargeBlocks) {
  CMatrix b = CMatrix::Identity(2, 2) * 1.01;
  EXPECT_THROW(PsiSet::from_blocks({b}).validate(), DomainError);
  EXPECT_NO_THROW(PsiSet::from_blocks({CMatrix::Identity(2, 2)}).validate());
}

TEST(LemmaSupBound, IdentityWithUnitNorm) {
  const std::vector<double> lam{0.5, 1.0, 2.0};
  const std::vector<CMatrix> mats(3, CMatrix::Identity(3, 3));
  const std::vector<double> alphas(3, 1.0);
  EXPECT_NEAR(lemma_sup_bound(lam, mats, alphas), 0.25 + 1.0 + 4.0, 1e-14);
}

TEST(LemmaSupBound, ScaledIdentityAttainsBound) {
  Rng rng({25, 0});
  for (int trial = 0; trial < 50; ++trial) {
    const int r = 1 + trial % 3;
    std::vector<double> lam;
    std::vector<CMatrix> mats;
    std::vector<double> alphas;
    std::vector<CMatrix> terms;
    for (int i = 0; i < r; ++i) lam.push_back(rng.uniform() + 0.1);
    for (int k = 0; k < 3; ++k) {
      mats.push_back(sample_ginibre(r, r, rng));
      alphas.push_back(rng.uniform());
      terms.push_back(mats.back() * (alphas.back() * mats.back().adjoint()));
    }
    CVector l(r);
    for (int i = 0; i < r; ++i) l(i) = lam[static_cast<std::size_t>(i)];
    const double attained = std::abs(cplx(l.transpose() * hadamard_product(terms) * l));
    const double bound = lemma_sup_bound(lam, mats, alphas);
    EXPECT_NEAR(attained, bound, 1e-10 * (1.0 + bound));
  }
}

TEST(LemmaSupBound, RandomBlocksStayBelow) {
  Rng rng({26, 0});
  for (int trial = 0; trial < 2000; ++trial) {
    const int r = 1 + trial % 4;
    const int d = 2 + trial % 3;
    std::vector<double> lam;
    std::vector<CMatrix> mats;
    std::vector<double> alphas;
    std::vector<CMatrix> terms;
    for (int i = 0; i < r; ++i) lam.push_back(rng.uniform() + 0.1);
    for (int k = 0; k < d; ++k) {
      mats.push_back(sample_ginibre(r, r, rng));
      CMatrix psi = sample_ginibre(r, r, rng);
      const double alpha = rng.uniform();
      psi *= alpha / spectral_norm(psi);
      alphas.push_back(alpha);
      terms.push_back(mats.back() * psi * mats.back().adjoint());
    }
    CVector l(r);
    for (int i = 0; i < r; ++i) l(i) = lam[static_cast<std::size_t>(i)];
    const double value = std::abs(cplx(l.transpose() * hadamard_product(terms) * l));
    const double bound = lemma_sup_bound(lam, mats, alphas);
    EXPECT_LE(value, bound * (1.0 + 1e-12) + 1e-14);
  }
}

TEST(GrfLowerBound, ClosedFormValues) {
  EXPECT_NEAR(grf_lower_bound(0.6, 1.0, 2), 1.8325814637483102, 1e-15);
  EXPECT_NEAR(grf_lower_bound(-0.6, 1.0, 2), 1.8325814637483102, 1e-15);
  EXPECT_EQ(grf_lower_bound(0.0, 1.0, 3), 0.0);
  EXPECT_TRUE(std::isinf(grf_lower_bound(1.0, 1.0, 3)));
  EXPECT_TRUE(std::isinf(grf_lower_bound(2.0, 1.0, 3)));
  EXPECT_NEAR(grf_lower_bound(0.125, 1.0, 3), -3.0 * std::log(0.75), 1e-14);
  EXPECT_THROW(grf_lower_bound(0.1, 0.0, 3), ParameterError);
}

TEST(GrfPsiRate, ClosedFormValues) {
  const std::vector<CMatrix> zeros(3, CMatrix::Zero(2, 2));
  EXPECT_EQ(grf_psi_rate(PsiSet::from_blocks(zeros)), 0.0);
  EXPECT_TRUE(std::isinf(grf_psi_rate(PsiSet::from_blocks({CMatrix::Identity(2, 2)}))));

  CMatrix diag = CMatrix::Zero(2, 2);
  diag(0, 0) = 0.5;
  diag(1, 1) = cplx(0.0, 0.3);
  const double expected = std::log(0.75) + std::log(0.91);
  EXPECT_NEAR(grf_psi_rate(PsiSet::from_blocks({diag, diag})), 2.0 * expected, 1e-14);

  EXPECT_THROW(grf_psi_rate(PsiSet::from_blocks({CMatrix::Identity(2, 2) * 1.1})), DomainError);
}

TEST(GrfPsiRate, PerBlockBoundBySpectralNorm) {
  Rng rng({27, 0});
  for (int trial = 0; trial < 1000; ++trial) {
    const PsiSet psis = sample_psi_set(3, 1 + trial % 4, 5, rng);
    for (std::size_t k = 0; k < psis.blocks.size(); ++k) {
      const double alpha = std::min(psis.norms[k], 1.0);
      EXPECT_LE(log_det_complement(psis.blocks[k]), std::log1p(-alpha * alpha) + 1e-12);
    }
  }
}

TEST(GrfCloud, NoViolations) {
  Rng rng({28, 0});
  for (int trial = 0; trial < 4; ++trial) {
    const auto spec = testing::random_spec(rng, 4, 3, 5);
    const GrfCloud cloud = sample_grf_cloud(spec, 5000, {28, static_cast<std::uint64_t>(trial)}, 40);
    EXPECT_EQ(cloud.points.size(), 5000u);
    EXPECT_EQ(cloud.bound_violations, 0u);
    EXPECT_EQ(cloud.per_block_violations, 0u);
    EXPECT_EQ(cloud.range_violations, 0u);
    for (const auto& bin : cloud.envelope) EXPECT_LE(bin.max_y, bin.bound_sup + 1e-9);
  }
}

TEST(GrfCloud, IndependentOfThreadCount) {
  Rng rng({29, 0});
  const auto spec = testing::random_spec(rng, 3, 2, 4);
  const GrfCloud a = sample_grf_cloud(spec, 9000, {29, 1}, 20, 1);
  const GrfCloud b = sample_grf_cloud(spec, 9000, {29, 1}, 20, 3);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].x, b.points[i].x);
    EXPECT_EQ(a.points[i].y, b.points[i].y);
  }
}

TEST(GrfCloud, AmplitudeScalingCovariance) {
  Rng rng({30, 0});
  auto spec = testing::random_spec(rng, 3, 3, 4);
  const GrfCloud a = sample_grf_cloud(spec, 2000, {30, 1}, 10);
  for (double& l : spec.lambdas) l *= 2.0;
  const GrfCloud b = sample_grf_cloud(spec, 2000, {30, 1}, 10);
  EXPECT_NEAR(b.eta_max, 4.0 * a.eta_max, 1e-12 * b.eta_max);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_NEAR(b.points[i].x, 4.0 * a.points[i].x, 1e-12 * (1.0 + std::abs(b.points[i].x)));
    EXPECT_EQ(b.points[i].y, a.points[i].y);
  }
}

TEST(GrfCloud, RankOneEnvelopeApproachesBound) {
  const auto spec = make_spike({1.0}, repeat_gram(identity_gram(1), 2), 4);
  const GrfCloud small = sample_grf_cloud(spec, 4096, {31, 0}, 20);
  const GrfCloud large = sample_grf_cloud(spec, 65536, {31, 0}, 20);
  const double gap_small = median_envelope_gap(small, 0.1, 0.9);
  const double gap_large = median_envelope_gap(large, 0.1, 0.9);
  EXPECT_GE(gap_small, 0.0);
  EXPECT_LT(gap_large, gap_small);
  EXPECT_LT(gap_large, 0.1);
}

TEST(UpperEnvelope, BinsAndOmission) {
  const std::vector<CloudPoint> pts{{-0.9, -3.0}, {-0.95, -1.0}, {0.1, -0.5}, {1.0, -7.0}};
  const auto env = upper_envelope(pts, 1.0, 2, 4);
  ASSERT_EQ(env.size(), 3u);
  EXPECT_DOUBLE_EQ(env[0].center, -0.75);
  EXPECT_EQ(env[0].max_y, -1.0);
  EXPECT_DOUBLE_EQ(env[1].center, 0.25);
  EXPECT_EQ(env[2].max_y, -7.0);
  EXPECT_NEAR(env[1].bound, 2.0 * std::log1p(-0.25), 1e-15);
  EXPECT_EQ(env[1].bound_sup, 0.0);
  EXPECT_NEAR(env[0].bound_sup, 2.0 * std::log1p(-0.5), 1e-15);
}

}  // namespace
}  // namespace spikedet
