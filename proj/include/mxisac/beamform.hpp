// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mxisac/channel.hpp"

namespace mxisac {

/// Group-connected hybrid beamformer. W_RF is block diagonal with K blocks of
/// size M x M_RF.
struct HybridBeamformer {
  CMatrix W_RF;
  CMatrix W_BB;
  int M_RF = 0;

  int N_RF() const { return static_cast<int>(W_RF.cols()); }
  /// R_X = W_RF W_BB W_BB^H W_RF^H
  CMatrix covariance() const;
};

/// One analog-beamformer slot per subarray: a sensing object or a comm path.
struct Slot {
  enum class Kind { sensing, comm };
  Kind kind = Kind::sensing;
  int index = 0;
};

/// All Q sensing slots followed by all Np comm slots.
std::vector<Slot> default_slots(int Q, int Np);
/// The first M_RF slots in priority order (target, comm paths, interferers),
/// returned in basis order (sensing before comm).
std::vector<Slot> priority_slots(int Q, int Np, int M_RF);

/// Subarray response subspace.
///
/// U holds G = slots.size() groups of K columns each; column g*K + k is the
/// zero-padded steering vector of slot g at subarray k. U_tilde regroups the
/// same columns by subarray (column k*G + g), so it is block diagonal with
/// blocks A_blocks[k]. U_tilde.col(j) == U.col(perm[j]).
struct SubspaceBasis {
  int K = 0;
  int M = 0;
  std::vector<Slot> slots;
  CMatrix U;
  CMatrix U_tilde;
  std::vector<CMatrix> A_blocks;
  std::vector<int> perm;

  int G() const { return static_cast<int>(slots.size()); }
  int N_RF() const { return static_cast<int>(U_tilde.cols()); }
};

SubspaceBasis build_subspace(const ArrayGeometry& geometry, const CommChannel& comm,
                             const SensingResponses& responses, const std::vector<Slot>& slots);

/// Largest pairwise |cos| between columns within any block; values near 1 mean
/// nearly coincident angles (kept, but poorly conditioned).
double max_block_coherence(const SubspaceBasis& basis);

/// W_RF* = U_tilde.
CMatrix optimal_analog(const SubspaceBasis& basis);

/// True when W has the K-block support of size M x (cols/K) and unit-modulus
/// in-block entries.
bool in_analog_set(const CMatrix& W, int K, int M, double tol = 1e-12);

/// log2 det(I + H W W^H H^H / sigma^2) with W = W_RF W_BB.
double spectral_efficiency(const CMatrix& H, const CMatrix& W_RF, const CMatrix& W_BB, double sigma_c_sq);
/// log2 det(I + H R H^H / sigma^2)
double spectral_efficiency_cov(const CMatrix& H, const CMatrix& R, double sigma_c_sq);

/// Output SCNR of receive filter w for transmit covariance R_X. Linear.
double scnr(const CVector& w, const SensingResponses& responses, const SensingScene& scene, const CMatrix& R_X,
            double sigma_s_sq);

/// MVDR receive filter for transmit covariance R_X.
CVector mvdr_receive(const SensingResponses& responses, const SensingScene& scene, const CMatrix& R_X,
                     double sigma_s_sq);

struct PhiSet {
  std::vector<CMatrix> Phi;  ///< Phi_q = |w^H g_rq|^2 (U~^H g_tq)(U~^H g_tq)^H
  double Gamma_0 = 0.0;      ///< Gamma_s sigma_s^2 ||w||^2
};

PhiSet phi_matrices(const SubspaceBasis& basis, const SensingResponses& responses, const CVector& w,
                    double Gamma_s, double sigma_s_sq);

/// Full-dimension counterpart (U~ replaced by I_N).
PhiSet phi_matrices_full(const SensingResponses& responses, const CVector& w, double Gamma_s, double sigma_s_sq);

/// Psi = alpha_0^2 Phi_0 - Gamma_s sum_{q>=1} alpha_q^2 Phi_q. The SCNR
/// constraint becomes tr(W^H Psi W) >= Gamma_0.
CMatrix sensing_form(const PhiSet& phi, const SensingScene& scene, double Gamma_s);

/// SCNR evaluated in reduced coordinates from Phi_q and W_BB.
double reduced_scnr(const PhiSet& phi, const SensingScene& scene, const CMatrix& W_BB, const CVector& w,
                    double sigma_s_sq);

struct TransmitPower {
  double exact = 0.0;  ///< ||W_RF W_BB||_F^2
  double proxy = 0.0;  ///< M ||W_BB||_F^2
};

TransmitPower transmit_power(const CMatrix& W_RF, const CMatrix& W_BB, int M);

/// ||P_perp R P_perp||_F / ||R||_F with P_perp the projector onto col(U~)^perp.
double verify_covariance_subspace(const CMatrix& R_X, const SubspaceBasis& basis);

}  // namespace mxisac
