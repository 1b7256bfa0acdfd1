#include "spikedet/spike_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spikedet/error.hpp"
#include "spikedet/random.hpp"

namespace spikedet {
namespace {

constexpr double kEigenNoise = 1e-13;

std::string mode_label(std::size_t k) { return "mode " + std::to_string(k + 1); }

// Ascending eigen-decomposition of a Hermitian matrix.
Eigen::SelfAdjointEigenSolver<CMatrix> hermitian_eigen(const CMatrix& g) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(g);
}

}  // namespace

void SpikeSpec::validate(AmplitudePolicy policy) const {
  if (d < 2) throw ParameterError("spike order d must be >= 2, got " + std::to_string(d));
  if (n < 1) throw ParameterError("spike dimension n must be >= 1, got " + std::to_string(n));
  if (r < 1) throw ParameterError("spike rank r must be >= 1, got " + std::to_string(r));
  if (r > n) {
    throw ParameterError("spike rank r=" + std::to_string(r) + " exceeds n=" + std::to_string(n));
  }
  if (lambdas.size() != static_cast<std::size_t>(r)) {
    throw DimensionError("expected " + std::to_string(r) + " amplitudes, got " +
                         std::to_string(lambdas.size()));
  }
  for (double l : lambdas) {
    const bool ok = policy == AmplitudePolicy::StrictlyPositive ? l > 0.0 : l >= 0.0;
    if (!ok || !std::isfinite(l)) {
      throw ParameterError("amplitude " + std::to_string(l) +
                           (policy == AmplitudePolicy::StrictlyPositive
                                ? " is not strictly positive"
                                : " is negative or not finite"));
    }
  }
  if (factors.size() != static_cast<std::size_t>(d)) {
    throw DimensionError("expected " + std::to_string(d) + " factor matrices, got " +
                         std::to_string(factors.size()));
  }
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const CMatrix& chi = factors[k];
    if (chi.rows() != n || chi.cols() != r) {
      throw DimensionError(mode_label(k) + ": factor is " + std::to_string(chi.rows()) + "x" +
                           std::to_string(chi.cols()) + ", expected " + std::to_string(n) + "x" +
                           std::to_string(r));
    }
    for (Eigen::Index i = 0; i < chi.cols(); ++i) {
      if (std::abs(chi.col(i).norm() - 1.0) > kUnitNormTolerance) {
        throw ParameterError(mode_label(k) + ": column " + std::to_string(i + 1) +
                             " does not have unit norm");
      }
    }
  }
}

void GramSet::validate() const {
  if (grams.empty()) throw ParameterError("GramSet is empty");
  const Eigen::Index r = grams.front().rows();
  for (std::size_t k = 0; k < grams.size(); ++k) {
    const CMatrix& g = grams[k];
    if (g.rows() != r || g.cols() != r) {
      throw DimensionError(mode_label(k) + ": Gram must be " + std::to_string(r) + "x" +
                           std::to_string(r));
    }
    if ((g - g.adjoint()).cwiseAbs().maxCoeff() > kGramHermitianTolerance) {
      throw ParameterError(mode_label(k) + ": Gram is not Hermitian");
    }
    for (Eigen::Index i = 0; i < r; ++i) {
      if (std::abs(g(i, i) - 1.0) > kGramHermitianTolerance) {
        throw ParameterError(mode_label(k) + ": Gram diagonal entry " + std::to_string(i + 1) +
                             " is not 1");
      }
      for (Eigen::Index j = 0; j < r; ++j) {
        if (std::abs(g(i, j)) > 1.0 + kGramHermitianTolerance) {
          throw ParameterError(mode_label(k) + ": Gram entry has modulus above 1");
        }
      }
    }
    const auto eig = hermitian_eigen(g);
    if (eig.eigenvalues().minCoeff() < -kGramEigenTolerance) {
      throw ParameterError(mode_label(k) + ": Gram is not positive semidefinite (eigenvalue " +
                           std::to_string(eig.eigenvalues().minCoeff()) + ")");
    }
  }
}

GramSet gram_set(const SpikeSpec& spec) {
  spec.validate(AmplitudePolicy::AllowZero);
  GramSet out;
  out.grams.reserve(spec.factors.size());
  for (const CMatrix& chi : spec.factors) {
    CMatrix g = chi.adjoint() * chi;
    // Exact Hermitian symmetry and unit diagonal; both hold to rounding.
    g = 0.5 * (g + g.adjoint()).eval();
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, i) = 1.0;
    out.grams.push_back(std::move(g));
  }
  return out;
}

std::vector<CMatrix> factors_from_grams(const GramSet& grams, int n, Rng* rng) {
  grams.validate();
  const int r = grams.rank();
  if (n < r) {
    throw ParameterError("factors_from_grams: n=" + std::to_string(n) + " is smaller than r=" +
                         std::to_string(r));
  }
  std::vector<CMatrix> factors;
  factors.reserve(grams.grams.size());
  for (const CMatrix& g : grams.grams) {
    const auto eig = hermitian_eigen(g);
    // Rounding-level eigenvalues count as zero.
    const RVector clipped = eig.eigenvalues().unaryExpr([](double e) { return e < kEigenNoise ? 0.0 : e; });
    const RVector roots = clipped.cwiseSqrt();
    const CMatrix& v = eig.eigenvectors();
    const CMatrix root = v * roots.cast<cplx>().asDiagonal() * v.adjoint();
    CMatrix chi = CMatrix::Zero(n, r);
    chi.topRows(r) = root;
    // Columns have norm sqrt(G_ii) = 1 up to rounding; make it exact.
    for (Eigen::Index i = 0; i < r; ++i) chi.col(i).normalize();
    if (rng != nullptr) chi = sample_haar_unitary(n, *rng) * chi;
    factors.push_back(std::move(chi));
  }
  return factors;
}

SpikeSpec make_spike(std::vector<double> lambdas, const GramSet& grams, int n, Rng* rng,
                     AmplitudePolicy policy) {
  SpikeSpec spec;
  spec.d = grams.order();
  spec.n = n;
  spec.r = grams.rank();
  spec.lambdas = std::move(lambdas);
  spec.factors = factors_from_grams(grams, n, rng);
  spec.validate(policy);
  return spec;
}

SpikeSvd spike_svd(const GramSet& grams) {
  grams.validate();
  SpikeSvd out;
  for (const CMatrix& g : grams.grams) {
    const auto eig = hermitian_eigen(g);
    const Eigen::Index r = g.rows();
    // Descending, ties kept in solver order.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(r));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return eig.eigenvalues()(a) > eig.eigenvalues()(b);
    });
    RVector sigma(r);
    CMatrix v(r, r);
    for (Eigen::Index i = 0; i < r; ++i) {
      const Eigen::Index src = order[static_cast<std::size_t>(i)];
      double lambda = eig.eigenvalues()(src);
      if (lambda < kEigenNoise) lambda = 0.0;
      sigma(i) = std::sqrt(lambda);
      v.col(i) = eig.eigenvectors().col(src);
    }
    out.sigmas.push_back(std::move(sigma));
    out.vs.push_back(std::move(v));
  }
  return out;
}

SpikeSvd spike_svd(const SpikeSpec& spec) { return spike_svd(gram_set(spec)); }

CMatrix hadamard_product(std::span<const CMatrix> mats) {
  if (mats.empty()) throw ParameterError("hadamard_product: no matrices");
  CMatrix out = mats.front();
  for (std::size_t k = 1; k < mats.size(); ++k) {
    if (mats[k].rows() != out.rows() || mats[k].cols() != out.cols()) {
      throw DimensionError("hadamard_product: shape mismatch");
    }
    out = out.cwiseProduct(mats[k]);
  }
  return out;
}

double eta_max(std::span<const double> lambdas, const GramSet& grams) {
  const CMatrix h = hadamard_product(grams.grams);
  if (static_cast<std::size_t>(h.rows()) != lambdas.size()) {
    throw DimensionError("eta_max: " + std::to_string(lambdas.size()) + " amplitudes for rank " +
                         std::to_string(h.rows()));
  }
  const RVector lam = Eigen::Map<const RVector>(lambdas.data(), static_cast<Eigen::Index>(lambdas.size()));
  const CVector lc = lam.cast<cplx>();
  const cplx q = lc.transpose() * h * lc;
  // PSD Hadamard product: the imaginary part is rounding and the value >= 0.
  return std::max(q.real(), 0.0);
}

CMatrix identity_gram(int r) { return CMatrix::Identity(r, r); }

CMatrix all_ones_gram(int r) { return CMatrix::Ones(r, r); }

CMatrix two_eigenvalue_gram(double a, double b) {
  if (a < 0.0 || b < 0.0 || std::abs(a + b - 2.0) > 1e-12) {
    throw ParameterError("two-eigenvalue Gram needs a, b >= 0 with a + b = 2 (unit diagonal), got " +
                         std::to_string(a) + ", " + std::to_string(b));
  }
  const double off = 0.5 * std::abs(a - b);
  CMatrix g(2, 2);
  g << 1.0, off, off, 1.0;
  return g;
}

CMatrix random_gram(int r, int m, Rng& rng) {
  if (r < 1 || m < 1) throw ParameterError("random_gram: r and m must be >= 1");
  CMatrix cols(m, r);
  for (int i = 0; i < r; ++i) cols.col(i) = sample_unit_sphere(m, rng);
  CMatrix g = cols.adjoint() * cols;
  g = 0.5 * (g + g.adjoint()).eval();
  for (Eigen::Index i = 0; i < r; ++i) g(i, i) = 1.0;
  return g;
}

GramSet repeat_gram(const CMatrix& gram, int d) {
  return GramSet{std::vector<CMatrix>(static_cast<std::size_t>(d), gram)};
}

}  // namespace spikedet
