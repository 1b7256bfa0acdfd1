#include "spikedet/random.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "spikedet/error.hpp"

namespace spikedet {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SeedSpec SeedSpec::child(std::uint64_t index) const {
  return SeedSpec{master_seed, mix64(stream_id ^ mix64(index + 0x632be59bd9b4e019ULL))};
}

namespace {

std::mt19937_64 make_engine(const SeedSpec& seed) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed.master_seed),
      static_cast<std::uint32_t>(seed.master_seed >> 32),
      static_cast<std::uint32_t>(seed.stream_id),
      static_cast<std::uint32_t>(seed.stream_id >> 32),
  };
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(SeedSpec seed) : seed_(seed), engine_(make_engine(seed)) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

cplx Rng::complex_normal(double variance) {
  const double u1 = uniform_open_zero();
  const double u2 = uniform();
  // |z|^2 = -variance · log(u1) is exponential with mean `variance`.
  const double radius = std::sqrt(-variance * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

double Rng::normal() { return std::sqrt(2.0) * complex_normal(1.0).real(); }

ComplexTensor sample_gaussian_tensor(int n, int d, Rng& rng) {
  ComplexTensor z(d, n);
  const double variance = 1.0 / static_cast<double>(n);
  for (cplx& v : z.entries()) v = rng.complex_normal(variance);
  return z;
}

CMatrix sample_ginibre(int rows, int cols, Rng& rng, double variance) {
  CMatrix g(rows, cols);
  // Column-major fill order is part of the reproducible stream.
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.complex_normal(variance);
  }
  return g;
}

namespace {

CMatrix phase_corrected_q(const CMatrix& ginibre, Eigen::Index cols) {
  Eigen::HouseholderQR<CMatrix> qr(ginibre);
  CMatrix q = qr.householderQ() * CMatrix::Identity(ginibre.rows(), cols);
  const CMatrix& packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j) {
    const cplx diag = packed(j, j);
    const double mod = std::abs(diag);
    if (mod > 0.0) q.col(j) *= diag / mod;
  }
  return q;
}

}  // namespace

CMatrix sample_haar_unitary(int n, Rng& rng) {
  if (n < 1) throw ParameterError("sample_haar_unitary: n must be >= 1");
  return phase_corrected_q(sample_ginibre(n, n, rng), n);
}

CMatrix sample_haar_columns(int n, int cols, Rng& rng) {
  if (cols < 1 || cols > n) {
    throw ParameterError("sample_haar_columns: need 1 <= cols <= n, got cols=" +
                         std::to_string(cols) + ", n=" + std::to_string(n));
  }
  return phase_corrected_q(sample_ginibre(n, cols, rng), cols);
}

CVector sample_unit_sphere(int n, Rng& rng) {
  if (n < 1) throw ParameterError("sample_unit_sphere: n must be >= 1");
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.complex_normal(1.0);
  return v / v.norm();
}

CMatrix sample_psi_block(int n, int r, Rng& rng) {
  if (r < 1 || r > n) {
    throw ParameterError("sample_psi_block: need 1 <= r <= n, got r=" + std::to_string(r) +
                         ", n=" + std::to_string(n));
  }
  return sample_haar_columns(n, r, rng).topRows(r);
}

}  // namespace spikedet
