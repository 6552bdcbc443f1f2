// SPDX-License-Identifier: Apache-2.0
#include "mxisac/linalg.hpp"

#include <cmath>
#include <limits>

namespace mxisac {

HermitianEig hermitian_eig(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  const Eigen::Index n = a.rows();
  HermitianEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen returns ascending order.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = es.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return out;
}

CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

CMatrix skew_part(const CMatrix& a) { return 0.5 * (a - a.adjoint()); }

int numerical_rank(const CMatrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  const RVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cut = rel_tol * s(0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  return r;
}

CMatrix column_space_projector(const CMatrix& a, double rel_cutoff) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  const Eigen::Index n = a.rows();
  if (s.size() == 0 || s(0) <= 0.0) return CMatrix::Zero(n, n);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > rel_cutoff * s(0)) ++r;
  const CMatrix u = svd.matrixU().leftCols(r);
  return u * u.adjoint();
}

CMatrix polar_factor(const CMatrix& z) {
  Eigen::JacobiSVD<CMatrix> svd(z, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

CMatrix hermitian_sqrt(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  RVector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

double log_det_hpd(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(hermitian_part(a));
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  const CMatrix& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double d = l(i, i).real();
    if (!(d > 0.0)) return -std::numeric_limits<double>::infinity();
    acc += 2.0 * std::log(d);
  }
  return acc;
}

double real_inner(const CMatrix& a, const CMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

double log2_from_ln(double nats) { return nats / std::log(2.0); }

}  // namespace mxisac
