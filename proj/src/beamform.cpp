// SPDX-License-Identifier: Apache-2.0
#include "mxisac/beamform.hpp"

#include <algorithm>
#include <cmath>

#include "mxisac/error.hpp"

namespace mxisac {

CMatrix HybridBeamformer::covariance() const {
  const CMatrix W = W_RF * W_BB;
  return W * W.adjoint();
}

std::vector<Slot> default_slots(int Q, int Np) {
  std::vector<Slot> s;
  for (int q = 0; q < Q; ++q) s.push_back({Slot::Kind::sensing, q});
  for (int p = 0; p < Np; ++p) s.push_back({Slot::Kind::comm, p});
  return s;
}

std::vector<Slot> priority_slots(int Q, int Np, int M_RF) {
  if (M_RF < 1 || M_RF > Q + Np) throw Error(ErrorKind::configuration, "rf_per_subarray: must lie in [1, Q + Np]");
  std::vector<Slot> ranked;
  ranked.push_back({Slot::Kind::sensing, 0});
  for (int p = 0; p < Np; ++p) ranked.push_back({Slot::Kind::comm, p});
  for (int q = 1; q < Q; ++q) ranked.push_back({Slot::Kind::sensing, q});
  ranked.resize(static_cast<std::size_t>(M_RF));
  std::stable_sort(ranked.begin(), ranked.end(), [](const Slot& a, const Slot& b) {
    if (a.kind != b.kind) return a.kind == Slot::Kind::sensing;
    return a.index < b.index;
  });
  return ranked;
}

SubspaceBasis build_subspace(const ArrayGeometry& geometry, const CommChannel& comm,
                             const SensingResponses& responses, const std::vector<Slot>& slots) {
  if (slots.empty()) throw Error(ErrorKind::configuration, "subspace needs at least one slot");
  const int K = geometry.K(), M = geometry.M();
  const int G = static_cast<int>(slots.size());
  const double d = geometry.element_spacing(), lambda = geometry.wavelength();

  SubspaceBasis b;
  b.K = K;
  b.M = M;
  b.slots = slots;
  b.A_blocks.assign(static_cast<std::size_t>(K), CMatrix(M, G));
  for (int k = 0; k < K; ++k) {
    const auto ki = static_cast<std::size_t>(k);
    for (int g = 0; g < G; ++g) {
      const Slot& s = slots[static_cast<std::size_t>(g)];
      double angle = 0.0;
      if (s.kind == Slot::Kind::sensing) {
        if (s.index < 0 || s.index >= static_cast<int>(responses.objects.size()))
          throw Error(ErrorKind::shape_mismatch, "sensing slot index out of range");
        angle = responses.objects[static_cast<std::size_t>(s.index)].phi_t[ki];
      } else {
        if (s.index < 0 || s.index >= static_cast<int>(comm.paths().size()))
          throw Error(ErrorKind::shape_mismatch, "comm slot index out of range");
        angle = comm.paths()[static_cast<std::size_t>(s.index)].aod[ki];
      }
      b.A_blocks[ki].col(g) = steering_vector(M, angle, d, lambda);
    }
  }

  const int n = K * G;
  b.U = CMatrix::Zero(K * M, n);
  b.U_tilde = CMatrix::Zero(K * M, n);
  b.perm.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < K; ++k) {
    b.U_tilde.block(k * M, k * G, M, G) = b.A_blocks[static_cast<std::size_t>(k)];
    for (int g = 0; g < G; ++g) {
      b.U.block(k * M, g * K + k, M, 1) = b.A_blocks[static_cast<std::size_t>(k)].col(g);
      b.perm[static_cast<std::size_t>(k * G + g)] = g * K + k;
    }
  }
  return b;
}

double max_block_coherence(const SubspaceBasis& basis) {
  double worst = 0.0;
  for (const auto& A : basis.A_blocks)
    for (Eigen::Index i = 0; i < A.cols(); ++i)
      for (Eigen::Index j = i + 1; j < A.cols(); ++j)
        worst = std::max(worst, std::abs(A.col(i).dot(A.col(j))) / (A.col(i).norm() * A.col(j).norm()));
  return worst;
}

CMatrix optimal_analog(const SubspaceBasis& basis) { return basis.U_tilde; }

bool in_analog_set(const CMatrix& W, int K, int M, double tol) {
  if (W.rows() != static_cast<Eigen::Index>(K) * M || W.cols() % K != 0) return false;
  const Eigen::Index c = W.cols() / K;
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    const Eigen::Index blk = j / c;
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      const bool inside = i / M == blk;
      const double mag = std::abs(W(i, j));
      if (inside ? std::abs(mag - 1.0) > tol : mag != 0.0) return false;
    }
  }
  return true;
}

double spectral_efficiency(const CMatrix& H, const CMatrix& W_RF, const CMatrix& W_BB, double sigma_c_sq) {
  if (!(sigma_c_sq > 0.0)) throw Error(ErrorKind::domain, "sigma_c_sq must be > 0");
  if (H.cols() != W_RF.rows() || W_RF.cols() != W_BB.rows())
    throw Error(ErrorKind::shape_mismatch, "spectral_efficiency: nonconformant H, W_RF, W_BB");
  const CMatrix E = H * (W_RF * W_BB);
  if (!E.allFinite()) throw Error(ErrorKind::domain, "spectral_efficiency: non-finite input");
  // Work on the smaller Gram matrix; both give the same determinant.
  const CMatrix gram = (E.rows() <= E.cols()) ? CMatrix(E * E.adjoint()) : CMatrix(E.adjoint() * E);
  const CMatrix A = CMatrix::Identity(gram.rows(), gram.cols()) + gram / sigma_c_sq;
  return std::max(0.0, log2_from_ln(log_det_hpd(A)));
}

double spectral_efficiency_cov(const CMatrix& H, const CMatrix& R, double sigma_c_sq) {
  if (!(sigma_c_sq > 0.0)) throw Error(ErrorKind::domain, "sigma_c_sq must be > 0");
  if (H.cols() != R.rows()) throw Error(ErrorKind::shape_mismatch, "spectral_efficiency_cov: H and R");
  const CMatrix A = CMatrix::Identity(H.rows(), H.rows()) + H * R * H.adjoint() / sigma_c_sq;
  return std::max(0.0, log2_from_ln(log_det_hpd(A)));
}

namespace {

void check_scene(const SensingResponses& responses, const SensingScene& scene) {
  if (scene.objects.empty()) throw Error(ErrorKind::configuration, "scene: need at least one object");
  if (responses.objects.size() != scene.objects.size())
    throw Error(ErrorKind::shape_mismatch, "one response per scene object required");
}

}  // namespace

double scnr(const CVector& w, const SensingResponses& responses, const SensingScene& scene, const CMatrix& R_X,
            double sigma_s_sq) {
  check_scene(responses, scene);
  // w^H G_q R G_q^H w = alpha_q^2 |w^H g_rq|^2 g_tq^H R g_tq
  auto term = [&](std::size_t q) {
    const auto& o = responses.objects[q];
    const double a = scene.objects[q].alpha;
    return a * a * std::norm(w.dot(o.g_r)) * std::real(o.g_t.dot(R_X * o.g_t));
  };
  const double num = term(0);
  double den = sigma_s_sq * w.squaredNorm();
  for (std::size_t q = 1; q < responses.objects.size(); ++q) den += term(q);
  if (!(den > 0.0)) {
    if (num == 0.0) return 0.0;
    throw Error(ErrorKind::division_by_zero, "SCNR denominator is zero");
  }
  return num / den;
}

CVector mvdr_receive(const SensingResponses& responses, const SensingScene& scene, const CMatrix& R_X,
                     double sigma_s_sq) {
  check_scene(responses, scene);
  if (!(sigma_s_sq > 0.0)) throw Error(ErrorKind::domain, "MVDR needs sigma_s_sq > 0");
  const auto N = responses.objects.front().g_r.size();
  CMatrix S = sigma_s_sq * CMatrix::Identity(N, N);
  for (std::size_t q = 1; q < responses.objects.size(); ++q) {
    const auto& o = responses.objects[q];
    const double a = scene.objects[q].alpha;
    const double power = a * a * std::real(o.g_t.dot(R_X * o.g_t));
    S.noalias() += power * o.g_r * o.g_r.adjoint();
  }
  const CVector& g0 = responses.objects.front().g_r;
  Eigen::LLT<CMatrix> llt(S);
  const CVector x = llt.solve(g0);
  return x / g0.dot(x);
}

namespace {

PhiSet build_phi(const std::vector<CVector>& v, const SensingResponses& responses, const CVector& w,
                 double Gamma_s, double sigma_s_sq) {
  PhiSet out;
  out.Phi.reserve(v.size());
  for (std::size_t q = 0; q < v.size(); ++q) {
    const double c = std::norm(w.dot(responses.objects[q].g_r));
    out.Phi.push_back(c * v[q] * v[q].adjoint());
  }
  out.Gamma_0 = Gamma_s * sigma_s_sq * w.squaredNorm();
  return out;
}

}  // namespace

PhiSet phi_matrices(const SubspaceBasis& basis, const SensingResponses& responses, const CVector& w,
                    double Gamma_s, double sigma_s_sq) {
  std::vector<CVector> v;
  for (const auto& o : responses.objects) v.push_back(basis.U_tilde.adjoint() * o.g_t);
  return build_phi(v, responses, w, Gamma_s, sigma_s_sq);
}

PhiSet phi_matrices_full(const SensingResponses& responses, const CVector& w, double Gamma_s, double sigma_s_sq) {
  std::vector<CVector> v;
  for (const auto& o : responses.objects) v.push_back(o.g_t);
  return build_phi(v, responses, w, Gamma_s, sigma_s_sq);
}

CMatrix sensing_form(const PhiSet& phi, const SensingScene& scene, double Gamma_s) {
  if (phi.Phi.size() != scene.objects.size())
    throw Error(ErrorKind::shape_mismatch, "one Phi per scene object required");
  const double a0 = scene.objects[0].alpha;
  CMatrix Psi = a0 * a0 * phi.Phi[0];
  for (std::size_t q = 1; q < phi.Phi.size(); ++q) {
    const double a = scene.objects[q].alpha;
    Psi -= Gamma_s * a * a * phi.Phi[q];
  }
  return hermitian_part(Psi);
}

double reduced_scnr(const PhiSet& phi, const SensingScene& scene, const CMatrix& W_BB, const CVector& w,
                    double sigma_s_sq) {
  if (phi.Phi.size() != scene.objects.size())
    throw Error(ErrorKind::shape_mismatch, "one Phi per scene object required");
  auto term = [&](std::size_t q) {
    const double a = scene.objects[q].alpha;
    return a * a * std::real((W_BB.adjoint() * phi.Phi[q] * W_BB).trace());
  };
  const double num = term(0);
  double den = sigma_s_sq * w.squaredNorm();
  for (std::size_t q = 1; q < phi.Phi.size(); ++q) den += term(q);
  if (!(den > 0.0)) {
    if (num == 0.0) return 0.0;
    throw Error(ErrorKind::division_by_zero, "SCNR denominator is zero");
  }
  return num / den;
}

TransmitPower transmit_power(const CMatrix& W_RF, const CMatrix& W_BB, int M) {
  if (W_RF.cols() != W_BB.rows()) throw Error(ErrorKind::shape_mismatch, "transmit_power: W_RF and W_BB");
  return {(W_RF * W_BB).squaredNorm(), M * W_BB.squaredNorm()};
}

double verify_covariance_subspace(const CMatrix& R_X, const SubspaceBasis& basis) {
  if (R_X.rows() != basis.U_tilde.rows() || R_X.cols() != R_X.rows())
    throw Error(ErrorKind::shape_mismatch, "R_X must be N x N");
  const double nr = R_X.norm();
  if (nr == 0.0) return 0.0;
  const auto N = R_X.rows();
  const CMatrix Pp = CMatrix::Identity(N, N) - column_space_projector(basis.U_tilde, 1e-10);
  return (Pp * R_X * Pp).norm() / nr;
}

}  // namespace mxisac
