// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mxisac/linalg.hpp"
#include "mxisac/rng.hpp"

namespace mxisac {

/// maximize   ln det(I + H R H^H / sigma_c^2)
/// subject to R >= 0, tr(Omega R) <= budget, tr(Psi R) >= Gamma_0.
///
/// Omega defaults to the identity (the proxy power constraint). Passing
/// U~^H U~ instead constrains the exact radiated power.
struct MaxDetProblem {
  CMatrix H;
  double sigma_c_sq = 1.0;
  double budget = 0.0;
  CMatrix Omega;  ///< empty means identity
  CMatrix Psi;    ///< empty or sensing == false drops the SCNR constraint
  double Gamma_0 = 0.0;
  bool sensing = true;
  int Ns = 1;

  int n() const { return static_cast<int>(H.cols()); }
  CMatrix omega() const;
  bool has_sensing() const { return sensing && Psi.size() > 0; }
};

enum class SdpStatus { optimal, infeasible, max_iter };
const char* to_string(SdpStatus s);

struct SdpDiagnostic {
  double outer_t = 0.0;
  int inner_iter = 0;
  double objective = 0.0;
  double gap_surrogate = 0.0;
  double min_eig = 0.0;
};

struct SdpSolution {
  CMatrix R;
  double objective_nats = 0.0;
  double objective_bits = 0.0;
  /// Lagrange dual value at multipliers refined from the barrier solution;
  /// the relaxed optimum is at most this (weak duality). +inf if unavailable.
  double dual_bound_nats = std::numeric_limits<double>::infinity();
  double kkt_residual = 0.0;
  SdpStatus status = SdpStatus::max_iter;
  std::string message;
  std::vector<SdpDiagnostic> diagnostics;
};

struct SdpOptions {
  double tol = 1e-7;  ///< on the barrier gap m / t
  int max_newton = 200;  ///< per outer round
  int max_outer = 40;
  double mu = 10.0;
  double t0 = 1.0;
};

SdpSolution solve_maxdet(const MaxDetProblem& problem, const SdpOptions& options = {});

struct RandomizationResult {
  bool ok = false;
  CMatrix W;
  double se_bits = 0.0;
  int candidates_feasible = 0;
};

/// Gaussian randomization from R*: W_i = V Z_i, V = U_Ns Lambda_Ns^{1/2}, each
/// scaled to tr(W^H Omega W) = budget. Candidate 0 uses Z = I. Trial i draws
/// from its own stream seeded by derive_seed(seed, i).
RandomizationResult randomize_rank(const SdpSolution& solution, const MaxDetProblem& problem, int trials,
                                   std::uint64_t seed);

struct SdrResult {
  CMatrix W_BB;
  double se_bits = 0.0;
  double fdb_bits = 0.0;
  std::string status;  ///< ok | infeasible | randomization_failed | max_iter
  SdpSolution sdp;
};

/// Solve, randomize with 10 N_s trials, retry once with 100 N_s trials.
SdrResult sdr_rrs(const MaxDetProblem& problem, std::uint64_t seed, const SdpOptions& options = {});

/// Certified upper bound (bits) on the relaxed optimum from the dual value.
/// NaN when infeasible.
double fdb_bound_bits(const SdpSolution& solution);

double fdb_upper_bound(const MaxDetProblem& problem, const SdpOptions& options = {});

}  // namespace mxisac
