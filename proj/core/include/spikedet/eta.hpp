#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spikedet/linalg.hpp"
#include "spikedet/random.hpp"
#include "spikedet/spike_model.hpp"
#include "spikedet/tensor.hpp"

namespace spikedet {

/// One r x r matrix ψ_k per mode together with its spectral norm α_k.
struct PsiSet {
  std::vector<CMatrix> blocks;
  std::vector<double> norms;

  static PsiSet from_blocks(std::vector<CMatrix> blocks);

  int order() const { return static_cast<int>(blocks.size()); }
  /// Throws DomainError if some α_k exceeds 1 + 1e-12.
  void validate() const;
};

inline constexpr double kPsiNormTolerance = 1e-12;

/// η = Re Σ_{i,j} λ_i λ_j Π_k ξ_k^(i,j), ξ_k^(i,j) = <Θ_k x^(k,i), x^(k,j)>.
double eta_expanded(const SpikeSpec& spec, const ModeOperators& thetas);

/// eta_expanded without validating the spec or unitarity of `thetas`; for
/// inner Monte-Carlo loops that already hold validated inputs.
double eta_expanded_unchecked(const SpikeSpec& spec, std::span<const CMatrix> thetas);

/// η = Re[λ^T (⊙_k V_k Σ_k ψ_k Σ_k V_k*) λ].
double eta_hadamard(std::span<const double> lambdas, const SpikeSvd& svd, const PsiSet& psis);

/// ψ_k = upper r x r block of U_k* Θ_k U_k, where χ_k = U_k [Σ_k; 0] V_k*.
/// U_k's leading columns come from a QR factorization of χ_k V_k and are
/// not kept.
PsiSet psi_blocks_from_operators(const SpikeSpec& spec, const SpikeSvd& svd,
                                 const ModeOperators& thetas);

/// sup over ||ψ_k||_2 = α_k of |λ^T ⊙_k (A_k ψ_k A_k*) λ|, which equals
/// (Π_k α_k) λ^T (⊙_k A_k A_k*) λ.
double lemma_sup_bound(std::span<const double> lambdas, std::span<const CMatrix> mats,
                       std::span<const double> alphas);

/// -d log(1 - (|x|/η_max)^{2/d}), +inf when |x| >= η_max.
double grf_lower_bound(double x, double eta_max, int d);

/// Σ_k log det(I - ψ_k* ψ_k); -inf when some ψ_k has a unit singular value.
/// Throws DomainError if some α_k > 1 + 1e-12.
double grf_psi_rate(const PsiSet& psis);

/// log det(I - ψ* ψ) for one block.
double log_det_complement(const CMatrix& psi);

/// Draw law for the cloud experiment. With probability 1/4 every mode gets
/// sqrt(ρ_k) P_m, P_m the projector on the first m coordinates (m uniform in
/// 1..r, shared by the modes), ρ_k ~ U[0,1] shared by the modes half of the
/// time, and a random sign on the first mode. Otherwise each mode
/// independently gets, with probability 1/2, a Ginibre r x r matrix rescaled
/// to spectral norm sqrt(ρ), or else the upper r x r block of a Haar unitary
/// of size n.
PsiSet sample_psi_set(int d, int r, int n, Rng& rng);

struct CloudPoint {
  double x = 0.0;
  double y = 0.0;
};

struct EnvelopeBin {
  double center = 0.0;
  double max_y = 0.0;
  /// d log(1 - (|center|/η_max)^{2/d}), i.e. -grf_lower_bound(center).
  double bound = 0.0;
  /// The same curve at the bin edge closest to x = 0: its maximum over the bin.
  double bound_sup = 0.0;
};

struct GrfCloud {
  std::vector<CloudPoint> points;
  double eta_max = 0.0;
  int d = 0;
  std::vector<EnvelopeBin> envelope;
  /// Points with y above -grf_lower_bound(x) by more than 1e-9.
  std::size_t bound_violations = 0;
  /// Blocks with log det(I - ψ*ψ) > log(1 - ||ψ||^2) + 1e-12.
  std::size_t per_block_violations = 0;
  /// Points with |x| > η_max + 1e-9.
  std::size_t range_violations = 0;
};

inline constexpr double kCloudBoundTolerance = 1e-9;
inline constexpr double kPerBlockTolerance = 1e-12;

/// Samples `count` ψ-sets and records (η(ψ), Σ_k log det(I - ψ_k*ψ_k)).
/// Work is split in fixed chunks with their own sub-streams and merged in
/// chunk order, so the result does not depend on `threads`.
GrfCloud sample_grf_cloud(const SpikeSpec& spec, std::size_t count, SeedSpec seed, int bins,
                          unsigned threads = 1);

/// Per-bin maximum of y over `bins` equal-width bins spanning [-η_max, η_max].
/// Empty bins are omitted.
std::vector<EnvelopeBin> upper_envelope(std::span<const CloudPoint> points, double eta_max,
                                        int d, int bins);

/// Median of (bound_sup - max_y) over envelope bins with |center|/η_max in
/// [lo, hi]. NaN when no bin qualifies.
double median_envelope_gap(const GrfCloud& cloud, double lo, double hi);

}  // namespace spikedet
