#include "spikedet/tensor.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "spikedet/error.hpp"
#include "spikedet/spike_model.hpp"

namespace spikedet {
namespace {

std::size_t checked_size(int order, int dim) {
  if (order < 2) throw ParameterError("tensor order must be >= 2, got " + std::to_string(order));
  if (dim < 1) throw ParameterError("tensor dimension must be >= 1, got " + std::to_string(dim));
  std::size_t size = 1;
  for (int k = 0; k < order; ++k) size *= static_cast<std::size_t>(dim);
  return size;
}

std::size_t ipow(std::size_t base, int exp) {
  std::size_t out = 1;
  for (int k = 0; k < exp; ++k) out *= base;
  return out;
}

void require_same_shape(const ComplexTensor& a, const ComplexTensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch (order " +
                         std::to_string(a.order()) + ", dim " + std::to_string(a.dim()) +
                         " vs order " + std::to_string(b.order()) + ", dim " +
                         std::to_string(b.dim()) + ")");
  }
}

void require_operators_match(const ModeOperators& ops, const ComplexTensor& z) {
  if (ops.order() != z.order() || ops.dim() != z.dim()) {
    throw DimensionError("mode_product: " + std::to_string(ops.order()) + " operators of size " +
                         std::to_string(ops.dim()) + " for a tensor of order " +
                         std::to_string(z.order()) + ", dim " + std::to_string(z.dim()));
  }
}

}  // namespace

ComplexTensor::ComplexTensor(int order, int dim)
    : order_(order), dim_(dim), data_(checked_size(order, dim), cplx{0.0, 0.0}) {}

ComplexTensor::ComplexTensor(int order, int dim, std::vector<cplx> entries)
    : order_(order), dim_(dim), data_(std::move(entries)) {
  if (data_.size() != checked_size(order, dim)) {
    throw DimensionError("tensor entries: expected " + std::to_string(checked_size(order, dim)) +
                         " values, got " + std::to_string(data_.size()));
  }
}

ComplexTensor ComplexTensor::unit(int order, int dim, std::span<const int> index) {
  ComplexTensor t(order, dim);
  t.at(index) = 1.0;
  return t;
}

std::size_t ComplexTensor::flat_index(std::span<const int> index) const {
  if (static_cast<int>(index.size()) != order_) {
    throw DimensionError("tensor index has " + std::to_string(index.size()) +
                         " components, order is " + std::to_string(order_));
  }
  std::size_t flat = 0;
  for (int i : index) {
    if (i < 0 || i >= dim_) throw DimensionError("tensor index out of range");
    flat = flat * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
  }
  return flat;
}

cplx& ComplexTensor::at(std::span<const int> index) { return data_[flat_index(index)]; }
const cplx& ComplexTensor::at(std::span<const int> index) const { return data_[flat_index(index)]; }

ComplexTensor& ComplexTensor::operator+=(const ComplexTensor& other) {
  require_same_shape(*this, other, "tensor addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexTensor& ComplexTensor::operator*=(cplx scale) {
  for (auto& v : data_) v *= scale;
  return *this;
}

ModeOperators::ModeOperators(std::vector<CMatrix> matrices) : matrices_(std::move(matrices)) {
  if (matrices_.empty()) throw ParameterError("ModeOperators: no matrices");
  const auto n = matrices_.front().rows();
  for (std::size_t k = 0; k < matrices_.size(); ++k) {
    const CMatrix& m = matrices_[k];
    if (m.rows() != n || m.cols() != n) {
      throw ParameterError("ModeOperators: matrix " + std::to_string(k) + " is " +
                           std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                           ", expected " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (unitarity_defect(m) > kUnitaryTolerance) {
      throw ParameterError("ModeOperators: matrix " + std::to_string(k) + " is not unitary");
    }
  }
}

ModeOperators ModeOperators::identity(int order, int dim) {
  return ModeOperators(std::vector<CMatrix>(static_cast<std::size_t>(order),
                                            CMatrix::Identity(dim, dim)));
}

cplx frobenius_inner(const ComplexTensor& x, const ComplexTensor& y) {
  require_same_shape(x, y, "frobenius_inner");
  cplx acc{0.0, 0.0};
  const auto xs = x.entries();
  const auto ys = y.entries();
  for (std::size_t i = 0; i < xs.size(); ++i) acc += xs[i] * std::conj(ys[i]);
  return acc;
}

double frobenius_norm(const ComplexTensor& x) {
  double acc = 0.0;
  for (const cplx& v : x.entries()) acc += std::norm(v);
  return std::sqrt(acc);
}

ComplexTensor build_spike(const SpikeSpec& spec) {
  spec.validate(AmplitudePolicy::AllowZero);
  const std::size_t n = static_cast<std::size_t>(spec.n);
  ComplexTensor out(spec.d, spec.n);
  std::vector<cplx> term;
  std::vector<cplx> next;
  for (int i = 0; i < spec.r; ++i) {
    // Outer product built one mode at a time, matching row-major order.
    term.assign(1, cplx{spec.lambdas[static_cast<std::size_t>(i)], 0.0});
    for (int k = 0; k < spec.d; ++k) {
      const CMatrix& chi = spec.factors[static_cast<std::size_t>(k)];
      next.resize(term.size() * n);
      for (std::size_t p = 0; p < term.size(); ++p) {
        for (std::size_t a = 0; a < n; ++a) {
          next[p * n + a] = term[p] * chi(static_cast<Eigen::Index>(a), i);
        }
      }
      term.swap(next);
    }
    for (std::size_t f = 0; f < term.size(); ++f) out[f] += term[f];
  }
  return out;
}

ComplexTensor contract_mode(const CMatrix& m, const ComplexTensor& z, int mode) {
  const int n = z.dim();
  if (m.rows() != n || m.cols() != n) throw DimensionError("contract_mode: operator size mismatch");
  if (mode < 0 || mode >= z.order()) throw DimensionError("contract_mode: mode out of range");
  const std::size_t nn = static_cast<std::size_t>(n);
  const std::size_t pre = ipow(nn, mode);
  const std::size_t post = ipow(nn, z.order() - mode - 1);
  ComplexTensor out(z.order(), n);
  // View as (pre, n, post): out[p, i, q] = Σ_l m(i, l) z[p, l, q].
  for (std::size_t p = 0; p < pre; ++p) {
    for (std::size_t l = 0; l < nn; ++l) {
      const std::size_t src = (p * nn + l) * post;
      for (std::size_t i = 0; i < nn; ++i) {
        const cplx coeff = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
        const std::size_t dst = (p * nn + i) * post;
        for (std::size_t q = 0; q < post; ++q) out[dst + q] += coeff * z[src + q];
      }
    }
  }
  return out;
}

ComplexTensor mode_product(const ModeOperators& ops, const ComplexTensor& z) {
  require_operators_match(ops, z);
  ComplexTensor out = z;
  for (int k = 0; k < z.order(); ++k) out = contract_mode(ops[static_cast<std::size_t>(k)], out, k);
  return out;
}

ComplexTensor mode_product_naive(const ModeOperators& ops, const ComplexTensor& z) {
  require_operators_match(ops, z);
  const int d = z.order();
  const int n = z.dim();
  ComplexTensor out(d, n);
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::vector<int> ell(static_cast<std::size_t>(d));
  for (std::size_t fo = 0; fo < out.size(); ++fo) {
    std::size_t rem = fo;
    for (int k = d - 1; k >= 0; --k) {
      idx[static_cast<std::size_t>(k)] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    cplx acc{0.0, 0.0};
    for (std::size_t fl = 0; fl < z.size(); ++fl) {
      std::size_t r2 = fl;
      for (int k = d - 1; k >= 0; --k) {
        ell[static_cast<std::size_t>(k)] = static_cast<int>(r2 % static_cast<std::size_t>(n));
        r2 /= static_cast<std::size_t>(n);
      }
      cplx prod = z[fl];
      for (int k = 0; k < d; ++k) {
        prod *= ops[static_cast<std::size_t>(k)](idx[static_cast<std::size_t>(k)],
                                                 ell[static_cast<std::size_t>(k)]);
      }
      acc += prod;
    }
    out[fo] = acc;
  }
  return out;
}

}  // namespace spikedet
