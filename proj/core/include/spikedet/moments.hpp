#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "spikedet/monte_carlo.hpp"
#include "spikedet/random.hpp"
#include "spikedet/spike_model.hpp"
#include "spikedet/tensor.hpp"

namespace spikedet {

/// How the spike entering H1 is realized.
enum class SpikePrior {
  /// Each mode's factors rotated by an independent Haar unitary.
  HaarRotated,
  /// X = X_0, no rotation.
  Fixed,
};

/// E[exp(2nη)] over i.i.d. Haar Θ_1..Θ_d, with η from eta_expanded.
/// Batch means over min(samples, 32) batches, each on spec.child(b).
/// Zero amplitudes are admitted (null model). Requires samples >= 2.
MCEstimate second_moment_haar_mc(const SpikeSpec& spec, std::size_t samples, SeedSpec seed,
                                 unsigned threads = 1);

/// E_0[Λ̂(Y)^2] with Λ̂(Y) an `inner`-sample average of
/// exp(2n Re<Y,X> - n||X||_F^2) over spikes X drawn from `prior`.
/// Biased upward by O(1/inner). Intended for n <= 4, d <= 3.
MCEstimate second_moment_direct_mc(const SpikeSpec& spec, std::size_t outer, std::size_t inner,
                                   SeedSpec seed, SpikePrior prior = SpikePrior::HaarRotated,
                                   unsigned threads = 1);

struct SplitEstimate {
  double epsilon = 0.0;
  MCEstimate e1;     ///< E[exp(2nη) 1{η > ε}]
  MCEstimate e2;     ///< E[exp(2nη) 1{η <= ε}]
  MCEstimate total;  ///< identical to second_moment_haar_mc on the same seed
};

/// One pass over the second_moment_haar_mc sample stream. e1.mean + e2.mean
/// == total.mean holds exactly in double arithmetic: e2.mean is the
/// complement of e1.mean in the total, and either may move by a few ulps.
SplitEstimate e1_e2_split(const SpikeSpec& spec, double epsilon, std::size_t samples,
                          SeedSpec seed, unsigned threads = 1);

/// min(η_max / 4, r^2 max_{ij} λ_i λ_j).
double default_split_epsilon(const SpikeSpec& spec);

/// P(|ξ| >= t) = (1 - t^2)^{n-1} for ξ the first coordinate of a uniform
/// vector on the unit sphere of C^n. Throws ParameterError unless t in [0,1]
/// and n >= 2.
double xi_tail_probability(double t, int n);

/// Empirical frequency of |v_1| >= t over `samples` sphere draws.
MCEstimate xi_empirical_tail(int n, double t, std::size_t samples, SeedSpec seed);

enum class Hypothesis { H0, H1 };

struct HypothesisSample {
  ComplexTensor tensor;
  Hypothesis hypothesis = Hypothesis::H0;
  /// The realized spike under H1; empty under H0.
  std::optional<SpikeSpec> spike_used;
};

/// The spike with each mode's factors left-multiplied by an independent
/// Haar unitary.
SpikeSpec rotate_spike(const SpikeSpec& spec, Rng& rng);

/// H0: Y = Z. H1: Y = X + Z with X drawn from `prior`.
HypothesisSample simulate_observation(const SpikeSpec& spec, Hypothesis hypothesis, Rng& rng,
                                      SpikePrior prior = SpikePrior::HaarRotated);

/// log of the `inner`-sample estimate of E_X[exp(2n Re<Y,X> - n||X||_F^2)].
double log_lr_mc(const ComplexTensor& y, const SpikeSpec& spec, std::size_t inner, Rng& rng,
                 SpikePrior prior = SpikePrior::HaarRotated);

/// Mean of exp(log_lr_mc) over `draws` H0 observations; 1 in expectation.
MCEstimate likelihood_ratio_mean(const SpikeSpec& spec, std::size_t draws, std::size_t inner,
                                 SeedSpec seed, SpikePrior prior = SpikePrior::HaarRotated,
                                 unsigned threads = 1);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  /// Decision "H1 iff score >= threshold", thresholds descending from +inf.
  std::vector<RocPoint> points;
  /// max_t |tpr(t) - fpr(t)|.
  double tv_proxy = 0.0;
  std::size_t trials = 0;
};

/// `trials` observations under each hypothesis, scored by log_lr_mc.
RocCurve roc_experiment(const SpikeSpec& spec, std::size_t trials, std::size_t inner,
                        SeedSpec seed, unsigned threads = 1,
                        SpikePrior prior = SpikePrior::HaarRotated);

/// ROC of two score samples (exposed for testing).
RocCurve roc_from_scores(std::vector<double> h0_scores, std::vector<double> h1_scores);

}  // namespace spikedet
