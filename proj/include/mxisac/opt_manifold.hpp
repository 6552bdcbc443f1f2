// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mxisac/linalg.hpp"
#include "mxisac/rng.hpp"

namespace mxisac {

/// Reduced data for the manifold solver.
///
/// B = U~^H H^H H U~ / sigma_c^2 is truncated to its top N_s eigenpairs. The
/// digital beamformer is W_BB = T V~ diag(b) with T = U_B Sigma_B^{-1/2} and V~
/// an N_s x N_s unitary, so W_BB^H B W_BB = diag(b^2) and the log-det term
/// separates. B_tilde = Sigma_B^{-1} and Phi_tilde = T^H Psi T are the N_s x N_s
/// quadratic forms of the power and sensing constraints.
struct EigB {
  CMatrix B;
  CMatrix U_B;
  RVector Sigma_B;
  CMatrix T;
  CMatrix B_tilde;
  CMatrix Phi_tilde;
  CMatrix Psi;
  double budget = 0.0;   ///< N_s / M
  double Gamma_0 = 0.0;
  bool sensing = true;   ///< false drops the SCNR barrier (Gamma_s = 0)

  int Ns() const { return static_cast<int>(Sigma_B.size()); }
};

/// Throws rank_deficiency when N_s exceeds the numerical rank of B.
EigB reduce_B(const CMatrix& H_eff, double sigma_c_sq, const CMatrix& Psi, double Gamma_0, double budget,
              int Ns, bool sensing);

struct ManifoldState {
  CMatrix V;  ///< N_s x N_s unitary
  RVector b;
};

struct ManifoldConfig {
  double barrier_t = 100.0;
  double eps_V = 1e-6;  ///< on ||xi_V||^2
  double eps_b = 1e-6;  ///< on ||grad_b||^2
  int max_iter = 500;
  double shrink = 0.5;
  double slope = 1e-4;
  double initial_step = 1.0;
  double min_step = 1e-12;
  /// Plain metric only: start each line search from per-variable
  /// Barzilai-Borwein steps instead of initial_step.
  bool bb_step = true;
  /// Search-direction metric. plain: negative Riemannian gradient. block:
  /// V and b directions each scaled by the inverse of their own damped,
  /// eigenvalue-magnitude Hessian block. full: same with the joint Hessian.
  /// The b block uses power-coordinate curvature where that is larger.
  enum class Metric { plain, block, full };
  Metric metric = Metric::full;
  /// A step may not shrink either slack below this fraction of its value.
  double boundary_fraction = 0.5;
  bool continuation = false;
  double continuation_mu = 10.0;
  int continuation_rounds = 3;
};

CMatrix assemble_wbb(const EigB& eig, const ManifoldState& state);

/// (power slack u1, sensing slack u2); u2 is +inf when sensing is off.
std::pair<double, double> slacks(const ManifoldState& state, const EigB& eig);

/// +inf outside the strictly feasible set.
double barrier_value(const ManifoldState& state, const EigB& eig, double t);
RVector grad_b(const ManifoldState& state, const EigB& eig, double t);
/// Euclidean gradient under <A, B> = Re tr(A^H B).
CMatrix grad_V(const ManifoldState& state, const EigB& eig, double t);

/// -V skew(V^H G): the negative gradient projected onto the tangent space.
CMatrix tangent_project(const CMatrix& V, const CMatrix& G);
/// Polar factor of Z; throws retraction when Z is numerically singular.
CMatrix stiefel_retract(const CMatrix& Z);

struct Phase1Result {
  bool feasible = false;
  ManifoldState state;
  std::string certificate;  ///< why no strictly feasible point exists
  int bisections = 0;
};

/// Strictly feasible starting point. With `rng` the completion of V~ and the
/// stream weights are randomized; without it the construction is deterministic.
Phase1Result phase1_feasible(const EigB& eig, Rng* rng = nullptr);

enum class ManifoldStatus { converged, max_iter, line_search_stalled };
const char* to_string(ManifoldStatus s);

struct TraceRow {
  int iter = 0;
  double f = 0.0;
  double grad_norm_V = 0.0;
  double grad_norm_b = 0.0;
  double step_V = 0.0;
  double step_b = 0.0;
};

struct ManifoldResult {
  ManifoldState state;
  CMatrix W_BB;
  std::vector<TraceRow> trace;
  int iterations = 0;
  ManifoldStatus status = ManifoldStatus::max_iter;
};

/// Joint Riemannian descent on (V~, b). Throws state when `init` is infeasible.
/// Gradient g and Hessian H of (x, y) -> f(V exp(sum_a x_a E_a), b + y, t) at
/// zero. The E_a are the off-diagonal skew-Hermitian generators (column phases
/// leave f unchanged); the last N_s coordinates are b.
struct LocalModel {
  std::vector<CMatrix> gens;
  RVector g;
  RMatrix H;
};
LocalModel local_model(const ManifoldState& state, const EigB& eig, double t);

ManifoldResult rm_jgd(const EigB& eig, const ManifoldConfig& config, const ManifoldState& init);

}  // namespace mxisac
