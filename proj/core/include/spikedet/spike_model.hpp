#pragma once

#include <span>
#include <vector>

#include "spikedet/linalg.hpp"

namespace spikedet {

class Rng;

enum class AmplitudePolicy {
  StrictlyPositive,
  /// Admits λ_i = 0. Only used for null-model checks of the Monte-Carlo
  /// drivers; the spike model itself requires strictly positive amplitudes.
  AllowZero,
};

/// Rank-r spike Σ_i λ_i x^(1,i) ⊗ ... ⊗ x^(d,i); factors[k] is the n x r
/// matrix χ_k whose columns are the unit vectors x^(k,i).
struct SpikeSpec {
  int d = 0;
  int n = 0;
  int r = 0;
  std::vector<double> lambdas;
  std::vector<CMatrix> factors;

  /// Throws ParameterError / DimensionError when an invariant fails.
  void validate(AmplitudePolicy policy = AmplitudePolicy::StrictlyPositive) const;
};

/// Per-mode Gram matrices χ_k* χ_k: Hermitian PSD, unit diagonal.
struct GramSet {
  std::vector<CMatrix> grams;

  int order() const { return static_cast<int>(grams.size()); }
  int rank() const { return grams.empty() ? 0 : static_cast<int>(grams.front().rows()); }

  void validate() const;
};

/// G_k = V_k Σ_k^2 V_k*, Σ_k stored as its diagonal, sorted descending.
struct SpikeSvd {
  std::vector<RVector> sigmas;
  std::vector<CMatrix> vs;

  int order() const { return static_cast<int>(vs.size()); }
  int rank() const { return vs.empty() ? 0 : static_cast<int>(vs.front().rows()); }
};

inline constexpr double kUnitNormTolerance = 1e-10;
inline constexpr double kGramHermitianTolerance = 1e-12;
inline constexpr double kGramEigenTolerance = 1e-10;

GramSet gram_set(const SpikeSpec& spec);

/// Hermitian square root of each G_k in the top r rows of an n x r matrix
/// (zeros below), left-multiplied by a Haar unitary when `rng` is given.
/// Throws ParameterError if a Gram is not PSD or lacks a unit diagonal.
std::vector<CMatrix> factors_from_grams(const GramSet& grams, int n, Rng* rng = nullptr);

/// Convenience: a validated spec built from amplitudes and Gram targets.
SpikeSpec make_spike(std::vector<double> lambdas, const GramSet& grams, int n,
                     Rng* rng = nullptr,
                     AmplitudePolicy policy = AmplitudePolicy::StrictlyPositive);

/// Σ_k, V_k from the r x r eigendecomposition of each Gram (never from an
/// n x r SVD). Eigenvalues below 1e-13 (including small negatives) become zero.
SpikeSvd spike_svd(const GramSet& grams);
SpikeSvd spike_svd(const SpikeSpec& spec);

/// λ^T (G_1 ⊙ ... ⊙ G_d) λ.
double eta_max(std::span<const double> lambdas, const GramSet& grams);

/// Entry-wise product of the Grams.
CMatrix hadamard_product(std::span<const CMatrix> mats);

CMatrix identity_gram(int r);
CMatrix all_ones_gram(int r);
/// 2 x 2 real Gram with eigenvalues a and b (requires a + b = 2, a, b >= 0).
CMatrix two_eigenvalue_gram(double a, double b);
/// Gram of r random unit vectors in C^m (m >= 1).
CMatrix random_gram(int r, int m, Rng& rng);

/// The same Gram for every one of the d modes.
GramSet repeat_gram(const CMatrix& gram, int d);

}  // namespace spikedet
