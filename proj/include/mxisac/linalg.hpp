// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>

namespace mxisac {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

/// Eigenpairs of a Hermitian matrix, eigenvalues sorted in descending order.
struct HermitianEig {
  RVector values;
  CMatrix vectors;
};

HermitianEig hermitian_eig(const CMatrix& a);

/// (A + A^H) / 2
CMatrix hermitian_part(const CMatrix& a);

/// (A - A^H) / 2
CMatrix skew_part(const CMatrix& a);

/// Count of singular values strictly above rel_tol * sigma_max. Zero matrix -> 0.
int numerical_rank(const CMatrix& a, double rel_tol = 1e-8);

/// Orthogonal projector onto col(A), using a pseudo-inverse with relative cutoff.
CMatrix column_space_projector(const CMatrix& a, double rel_cutoff = 1e-10);

/// Polar factor U V^H of the SVD Z = U S V^H.
CMatrix polar_factor(const CMatrix& z);

/// Principal square root of a Hermitian PSD matrix (negative eigenvalues clipped).
CMatrix hermitian_sqrt(const CMatrix& a);

/// ln det(A) for Hermitian positive definite A. Returns -inf when A is not PD.
double log_det_hpd(const CMatrix& a);

/// Real inner product Re tr(A^H B).
double real_inner(const CMatrix& a, const CMatrix& b);

double log2_from_ln(double nats);

}  // namespace mxisac
