#pragma once

#include <complex>

#include <Eigen/Dense>

namespace spikedet {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// max_{ij} |(M*M - I)_{ij}|
inline double unitarity_defect(const CMatrix& m) {
  const CMatrix defect = m.adjoint() * m - CMatrix::Identity(m.cols(), m.cols());
  return defect.cwiseAbs().maxCoeff();
}

inline double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace spikedet
