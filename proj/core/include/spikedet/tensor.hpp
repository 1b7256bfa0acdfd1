#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spikedet/linalg.hpp"

namespace spikedet {

struct SpikeSpec;

/// Dense order-d complex tensor with every mode of dimension n, stored
/// row-major over (i_1, ..., i_d): the last index varies fastest.
class ComplexTensor {
 public:
  ComplexTensor(int order, int dim);
  ComplexTensor(int order, int dim, std::vector<cplx> entries);

  /// Tensor with a single one at `index` and zeros elsewhere.
  static ComplexTensor unit(int order, int dim, std::span<const int> index);

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t size() const { return data_.size(); }

  std::span<const cplx> entries() const { return data_; }
  std::span<cplx> entries() { return data_; }

  cplx& operator[](std::size_t flat) { return data_[flat]; }
  const cplx& operator[](std::size_t flat) const { return data_[flat]; }

  cplx& at(std::span<const int> index);
  const cplx& at(std::span<const int> index) const;

  std::size_t flat_index(std::span<const int> index) const;

  ComplexTensor& operator+=(const ComplexTensor& other);
  ComplexTensor& operator*=(cplx scale);

  friend ComplexTensor operator+(ComplexTensor lhs, const ComplexTensor& rhs) { return lhs += rhs; }
  friend ComplexTensor operator*(cplx scale, ComplexTensor t) { return t *= scale; }

  bool same_shape(const ComplexTensor& other) const {
    return order_ == other.order_ && dim_ == other.dim_;
  }

 private:
  int order_;
  int dim_;
  std::vector<cplx> data_;
};

/// One unitary n x n matrix per mode, applied as (Θ_1 ⊗ ... ⊗ Θ_d).
class ModeOperators {
 public:
  /// Throws ParameterError unless every matrix is square, all share one
  /// size, and each is unitary to within 1e-10 (max-norm of M*M - I).
  explicit ModeOperators(std::vector<CMatrix> matrices);

  static ModeOperators identity(int order, int dim);

  int order() const { return static_cast<int>(matrices_.size()); }
  int dim() const { return matrices_.empty() ? 0 : static_cast<int>(matrices_.front().rows()); }
  const CMatrix& operator[](std::size_t k) const { return matrices_[k]; }
  const std::vector<CMatrix>& matrices() const { return matrices_; }

 private:
  std::vector<CMatrix> matrices_;
};

inline constexpr double kUnitaryTolerance = 1e-10;

/// <X, Y> = Σ X_i conj(Y_i). Throws DimensionError on shape mismatch.
cplx frobenius_inner(const ComplexTensor& x, const ComplexTensor& y);
double frobenius_norm(const ComplexTensor& x);

/// X_0 = Σ_i λ_i x^(1,i) ⊗ ... ⊗ x^(d,i).
ComplexTensor build_spike(const SpikeSpec& spec);

/// (Θ_1 ⊗ ... ⊗ Θ_d) Z, entry (i_1..i_d) = Σ_l Π_k (Θ_k)_{i_k l_k} Z_{l_1..l_d}.
/// Computed as d successive single-mode contractions. For d = 2 this is
/// Θ_1 Z Θ_2^T.
ComplexTensor mode_product(const ModeOperators& ops, const ComplexTensor& z);

/// Direct evaluation of the d-fold index sum; O(n^{2d}). Reference only.
ComplexTensor mode_product_naive(const ModeOperators& ops, const ComplexTensor& z);

/// Contraction along one mode with an arbitrary n x n matrix.
ComplexTensor contract_mode(const CMatrix& m, const ComplexTensor& z, int mode);

}  // namespace spikedet
