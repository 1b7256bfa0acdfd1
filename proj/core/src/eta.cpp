#include "spikedet/eta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spikedet/error.hpp"
#include "spikedet/monte_carlo.hpp"

namespace spikedet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStructuredShare = 0.25;

CVector as_complex(std::span<const double> lambdas) {
  CVector v(static_cast<Eigen::Index>(lambdas.size()));
  for (std::size_t i = 0; i < lambdas.size(); ++i) v(static_cast<Eigen::Index>(i)) = lambdas[i];
  return v;
}

double real_quadratic_form(std::span<const double> lambdas, const CMatrix& m) {
  if (static_cast<std::size_t>(m.rows()) != lambdas.size()) {
    throw DimensionError("quadratic form: " + std::to_string(lambdas.size()) +
                         " amplitudes for an r=" + std::to_string(m.rows()) + " matrix");
  }
  const CVector lam = as_complex(lambdas);
  const cplx q = lam.transpose() * m * lam;
  return q.real();
}

}  // namespace

PsiSet PsiSet::from_blocks(std::vector<CMatrix> blocks) {
  PsiSet out;
  out.norms.reserve(blocks.size());
  for (const CMatrix& b : blocks) out.norms.push_back(spectral_norm(b));
  out.blocks = std::move(blocks);
  return out;
}

void PsiSet::validate() const {
  if (norms.size() != blocks.size()) throw DimensionError("PsiSet: norms and blocks differ in count");
  for (std::size_t k = 0; k < norms.size(); ++k) {
    if (!(norms[k] >= 0.0) || norms[k] > 1.0 + kPsiNormTolerance) {
      throw DomainError("psi block " + std::to_string(k + 1) + " has spectral norm " +
                        std::to_string(norms[k]) + " > 1");
    }
  }
}

double eta_expanded(const SpikeSpec& spec, const ModeOperators& thetas) {
  spec.validate(AmplitudePolicy::AllowZero);
  if (thetas.order() != spec.d || thetas.dim() != spec.n) {
    throw DimensionError("eta_expanded: operators do not match the spike shape");
  }
  return eta_expanded_unchecked(spec, thetas.matrices());
}

double eta_expanded_unchecked(const SpikeSpec& spec, std::span<const CMatrix> thetas) {
  const auto r = static_cast<Eigen::Index>(spec.r);
  // M_k = χ_k* Θ_k χ_k; ξ_k^(i,j) = <Θ_k x^(k,i), x^(k,j)> = (M_k)_{j,i}.
  std::vector<CMatrix> m;
  m.reserve(static_cast<std::size_t>(spec.d));
  for (int k = 0; k < spec.d; ++k) {
    const CMatrix& chi = spec.factors[static_cast<std::size_t>(k)];
    m.push_back(chi.adjoint() * (thetas[static_cast<std::size_t>(k)] * chi));
  }
  double eta = 0.0;
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      cplx prod{1.0, 0.0};
      for (const CMatrix& mk : m) prod *= mk(j, i);
      eta += spec.lambdas[static_cast<std::size_t>(i)] * spec.lambdas[static_cast<std::size_t>(j)] *
             prod.real();
    }
  }
  return eta;
}

double eta_hadamard(std::span<const double> lambdas, const SpikeSvd& svd, const PsiSet& psis) {
  if (psis.order() != svd.order()) throw DimensionError("eta_hadamard: order mismatch");
  const Eigen::Index r = svd.rank();
  std::vector<CMatrix> terms;
  terms.reserve(static_cast<std::size_t>(svd.order()));
  for (int k = 0; k < svd.order(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const CMatrix& psi = psis.blocks[ks];
    if (psi.rows() != r || psi.cols() != r) throw DimensionError("eta_hadamard: psi block is not r x r");
    const CMatrix vs = svd.vs[ks] * svd.sigmas[ks].cast<cplx>().asDiagonal();
    terms.push_back(vs * psi * vs.adjoint());
  }
  return real_quadratic_form(lambdas, hadamard_product(terms));
}

PsiSet psi_blocks_from_operators(const SpikeSpec& spec, const SpikeSvd& svd,
                                 const ModeOperators& thetas) {
  spec.validate(AmplitudePolicy::AllowZero);
  if (svd.order() != spec.d || svd.rank() != spec.r || thetas.order() != spec.d ||
      thetas.dim() != spec.n) {
    throw DimensionError("psi_blocks_from_operators: inconsistent shapes");
  }
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto r = static_cast<Eigen::Index>(spec.r);
  std::vector<CMatrix> blocks;
  blocks.reserve(static_cast<std::size_t>(spec.d));
  for (int k = 0; k < spec.d; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    // χ_k V_k = U_k Σ_k; Householder QR gives U_k's leading r columns
    // (R ≈ Σ_k), including directions where σ_i vanishes.
    const CMatrix chi_v = spec.factors[ks] * svd.vs[ks];
    Eigen::HouseholderQR<CMatrix> qr(chi_v);
    CMatrix u = qr.householderQ() * CMatrix::Identity(n, r);
    const CMatrix& packed = qr.matrixQR();
    for (Eigen::Index i = 0; i < r; ++i) {
      const double mag = std::abs(packed(i, i));
      if (mag > 0.0) u.col(i) *= packed(i, i) / mag;
    }
    blocks.push_back(u.adjoint() * thetas[ks] * u);
  }
  return PsiSet::from_blocks(std::move(blocks));
}

double lemma_sup_bound(std::span<const double> lambdas, std::span<const CMatrix> mats,
                       std::span<const double> alphas) {
  if (mats.size() != alphas.size()) throw DimensionError("lemma_sup_bound: matrix/norm count mismatch");
  double scale = 1.0;
  for (double a : alphas) {
    if (a < 0.0) throw ParameterError("lemma_sup_bound: spectral norms must be >= 0");
    scale *= a;
  }
  std::vector<CMatrix> grams;
  grams.reserve(mats.size());
  for (const CMatrix& a : mats) grams.push_back(a * a.adjoint());
  return scale * real_quadratic_form(lambdas, hadamard_product(grams));
}

double grf_lower_bound(double x, double eta_max, int d) {
  if (!(eta_max > 0.0)) throw ParameterError("grf_lower_bound: eta_max must be > 0");
  if (d < 2) throw ParameterError("grf_lower_bound: d must be >= 2");
  const double ratio = std::abs(x) / eta_max;
  if (ratio >= 1.0) return kInf;
  return -d * std::log1p(-std::pow(ratio, 2.0 / d));
}

double log_det_complement(const CMatrix& psi) {
  Eigen::JacobiSVD<CMatrix> svd(psi);
  double total = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);
    if (s > 1.0 + kPsiNormTolerance) {
      throw DomainError("log det(I - psi* psi): singular value " + std::to_string(s) + " > 1");
    }
    if (s >= 1.0) return -kInf;
    total += std::log1p(-s * s);
  }
  return total;
}

double grf_psi_rate(const PsiSet& psis) {
  psis.validate();
  double total = 0.0;
  for (const CMatrix& psi : psis.blocks) total += log_det_complement(psi);
  return total;
}

PsiSet sample_psi_set(int d, int r, int n, Rng& rng) {
  if (d < 1 || r < 1) throw ParameterError("sample_psi_set: d and r must be >= 1");
  std::vector<CMatrix> blocks;
  blocks.reserve(static_cast<std::size_t>(d));
  if (rng.uniform() < kStructuredShare) {
    // sqrt(ρ_k) P_m with P_m the projector on the leading m coordinates,
    // shared by all modes; ρ shared half of the time; random overall sign.
    const int m = 1 + static_cast<int>(rng.uniform() * r);
    CMatrix proj = CMatrix::Zero(r, r);
    for (int i = 0; i < m; ++i) proj(i, i) = 1.0;
    const bool shared = rng.uniform() < 0.5;
    const double rho0 = rng.uniform();
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    for (int k = 0; k < d; ++k) {
      const double rho = shared ? rho0 : rng.uniform();
      blocks.push_back(proj * ((k == 0 ? sign : 1.0) * std::sqrt(rho)));
    }
    return PsiSet::from_blocks(std::move(blocks));
  }
  for (int k = 0; k < d; ++k) {
    if (rng.uniform() < 0.5) {
      CMatrix g = sample_ginibre(r, r, rng);
      const double rho = rng.uniform();
      const double norm = spectral_norm(g);
      blocks.push_back(norm > 0.0 ? CMatrix(g * (std::sqrt(rho) / norm)) : CMatrix::Zero(r, r));
    } else {
      blocks.push_back(sample_psi_block(n, r, rng));
    }
  }
  return PsiSet::from_blocks(std::move(blocks));
}

std::vector<EnvelopeBin> upper_envelope(std::span<const CloudPoint> points, double eta_max, int d,
                                        int bins) {
  if (bins < 1) throw ParameterError("upper_envelope: bins must be >= 1");
  if (!(eta_max > 0.0)) throw ParameterError("upper_envelope: eta_max must be > 0");
  const double width = 2.0 * eta_max / bins;
  std::vector<double> best(static_cast<std::size_t>(bins), -kInf);
  std::vector<bool> seen(static_cast<std::size_t>(bins), false);
  for (const CloudPoint& p : points) {
    auto b = static_cast<long>(std::floor((p.x + eta_max) / width));
    b = std::clamp(b, 0L, static_cast<long>(bins) - 1);
    const auto bs = static_cast<std::size_t>(b);
    seen[bs] = true;
    best[bs] = std::max(best[bs], p.y);
  }
  std::vector<EnvelopeBin> out;
  for (int b = 0; b < bins; ++b) {
    const auto bs = static_cast<std::size_t>(b);
    if (!seen[bs]) continue;
    const double lo = -eta_max + b * width;
    const double hi = lo + width;
    const double inner = lo <= 0.0 && hi >= 0.0 ? 0.0 : std::min(std::abs(lo), std::abs(hi));
    const double center = lo + 0.5 * width;
    out.push_back({center, best[bs], -grf_lower_bound(center, eta_max, d),
                   -grf_lower_bound(inner, eta_max, d)});
  }
  return out;
}

double median_envelope_gap(const GrfCloud& cloud, double lo, double hi) {
  std::vector<double> gaps;
  for (const EnvelopeBin& bin : cloud.envelope) {
    const double frac = std::abs(bin.center) / cloud.eta_max;
    if (frac >= lo && frac <= hi && std::isfinite(bin.max_y)) gaps.push_back(bin.bound_sup - bin.max_y);
  }
  if (gaps.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(gaps.begin(), gaps.end());
  const std::size_t mid = gaps.size() / 2;
  return gaps.size() % 2 == 1 ? gaps[mid] : 0.5 * (gaps[mid - 1] + gaps[mid]);
}

namespace {

constexpr std::size_t kCloudChunk = 4096;

struct CloudChunk {
  std::vector<CloudPoint> points;
  std::size_t bound_violations = 0;
  std::size_t per_block_violations = 0;
  std::size_t range_violations = 0;
};

}  // namespace

GrfCloud sample_grf_cloud(const SpikeSpec& spec, std::size_t count, SeedSpec seed, int bins,
                          unsigned threads) {
  spec.validate();
  if (count < 1) throw ParameterError("sample_grf_cloud: count must be >= 1");
  if (bins < 1) throw ParameterError("sample_grf_cloud: bins must be >= 1");
  const GramSet grams = gram_set(spec);
  const SpikeSvd svd = spike_svd(grams);
  const double emax = eta_max(spec.lambdas, grams);
  const std::size_t chunks = (count + kCloudChunk - 1) / kCloudChunk;
  std::vector<CloudChunk> results(chunks);

  parallel_for(chunks, threads, [&](std::size_t c) {
    Rng rng(seed.child(c));
    const std::size_t begin = c * kCloudChunk;
    const std::size_t end = std::min(count, begin + kCloudChunk);
    CloudChunk& out = results[c];
    out.points.reserve(end - begin);
    for (std::size_t s = begin; s < end; ++s) {
      const PsiSet psis = sample_psi_set(spec.d, spec.r, spec.n, rng);
      double y = 0.0;
      for (std::size_t k = 0; k < psis.blocks.size(); ++k) {
        const double term = log_det_complement(psis.blocks[k]);
        const double alpha = std::min(psis.norms[k], 1.0);
        if (term > std::log1p(-alpha * alpha) + kPerBlockTolerance) ++out.per_block_violations;
        y += term;
      }
      const double x = eta_hadamard(spec.lambdas, svd, psis);
      if (std::abs(x) > emax + kCloudBoundTolerance) ++out.range_violations;
      if (y > -grf_lower_bound(x, emax, spec.d) + kCloudBoundTolerance) ++out.bound_violations;
      out.points.push_back({x, y});
    }
  });

  GrfCloud cloud;
  cloud.eta_max = emax;
  cloud.d = spec.d;
  cloud.points.reserve(count);
  for (CloudChunk& c : results) {
    cloud.points.insert(cloud.points.end(), c.points.begin(), c.points.end());
    cloud.bound_violations += c.bound_violations;
    cloud.per_block_violations += c.per_block_violations;
    cloud.range_violations += c.range_violations;
  }
  cloud.envelope = upper_envelope(cloud.points, emax, spec.d, bins);
  return cloud;
}

}  // namespace spikedet
