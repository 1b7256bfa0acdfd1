#pragma once

#include <compare>
#include <cstdint>
#include <random>

#include "spikedet/linalg.hpp"
#include "spikedet/tensor.hpp"

namespace spikedet {

/// (master_seed, stream_id) identifies one reproducible random stream.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  /// Deterministic sub-stream; distinct indices give distinct streams.
  SeedSpec child(std::uint64_t index) const;

  friend auto operator<=>(const SeedSpec&, const SeedSpec&) = default;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Single-owner generator. All transforms on top of the 64-bit engine are
/// written out here, so a SeedSpec produces the same stream on every
/// platform (std::normal_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(SeedSpec seed);

  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;
  Rng(Rng&&) = default;
  Rng& operator=(Rng&&) = default;

  const SeedSpec& seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_zero() { return 1.0 - uniform(); }
  /// Circular complex Gaussian with E|z|^2 = variance (Box–Muller).
  cplx complex_normal(double variance = 1.0);
  /// Standard real normal (real part of a complex draw, rescaled).
  double normal();

 private:
  SeedSpec seed_;
  std::mt19937_64 engine_;
};

/// Entries i.i.d. N_C(0, 1/n): real and imaginary parts each N(0, 1/(2n)).
ComplexTensor sample_gaussian_tensor(int n, int d, Rng& rng);

/// rows x cols matrix of i.i.d. N_C(0, variance) entries.
CMatrix sample_ginibre(int rows, int cols, Rng& rng, double variance = 1.0);

/// Haar-distributed U(n): Ginibre, Householder QR, then Q · diag(R_ii/|R_ii|)
/// so that R has a positive real diagonal. Without the phase step the law is
/// not Haar.
CMatrix sample_haar_unitary(int n, Rng& rng);

/// First `cols` columns of a Haar unitary of size n (thin QR with the same
/// phase correction).
CMatrix sample_haar_columns(int n, int cols, Rng& rng);

/// Uniform on the unit sphere of C^n.
CVector sample_unit_sphere(int n, Rng& rng);

/// Top-left r x r block of a Haar n x n unitary. Throws ParameterError
/// unless 1 <= r <= n.
CMatrix sample_psi_block(int n, int r, Rng& rng);

}  // namespace spikedet
