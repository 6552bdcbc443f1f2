// SPDX-License-Identifier: Apache-2.0
#include "mxisac/opt_sdr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mxisac/error.hpp"

namespace mxisac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::sqrt(2.0);

// Real orthonormal coordinates of an n x n Hermitian matrix: the diagonal, then
// sqrt(2) Re Y_ij and sqrt(2) Im Y_ij for i < j. Re tr(A B) = coords(A).coords(B).
RVector coords(const CMatrix& Y) {
  const auto n = Y.rows();
  RVector v(n * n);
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < n; ++i) v(p++) = Y(i, i).real();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      v(p++) = kSqrt2 * Y(i, j).real();
      v(p++) = kSqrt2 * Y(i, j).imag();
    }
  return v;
}

CMatrix from_coords(const RVector& v, Eigen::Index n) {
  CMatrix Y(n, n);
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < n; ++i) Y(i, i) = v(p++);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double re = v(p++) / kSqrt2;
      const double im = v(p++) / kSqrt2;
      Y(i, j) = cd(re, im);
      Y(j, i) = cd(re, -im);
    }
  return Y;
}

// Columns are coords(F E F^H) over the orthonormal basis E of Hermitian
// r x r matrices (r = F.cols()), so X -> F F^H X F F^H is J J^T.
RMatrix congruence_factor(const CMatrix& F) {
  const auto r = F.cols();
  RMatrix J(F.rows() * F.rows(), r * r);
  Eigen::Index a = 0;
  for (Eigen::Index i = 0; i < r; ++i) J.col(a++) = coords(F.col(i) * F.col(i).adjoint());
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = i + 1; j < r; ++j) {
      const CMatrix X = F.col(i) * F.col(j).adjoint();
      J.col(a++) = coords((X + X.adjoint()) / kSqrt2);
      J.col(a++) = coords(cd(0.0, 1.0) * (X - X.adjoint()) / kSqrt2);
    }
  return J;
}

// Solves (I + Z Z^T) x = rhs. With Z = Q R (thin), the inverse is
// (I - Q Q^T) + Q (I + R R^T)^{-1} Q^T, so only a k x k system is factored.
RVector solve_identity_plus_lowrank(const RMatrix& Z, const RVector& rhs) {
  const auto n = Z.rows(), k = Z.cols();
  if (k >= n) {
    RMatrix H = Z * Z.transpose();
    H.diagonal().array() += 1.0;
    return H.llt().solve(rhs);
  }
  const Eigen::HouseholderQR<RMatrix> qr(Z);
  const RMatrix Q = qr.householderQ() * RMatrix::Identity(n, k);
  const RMatrix Rz = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  RMatrix S = Rz * Rz.transpose();
  S.diagonal().array() += 1.0;
  const RVector y = Q.transpose() * rhs;
  return rhs - Q * y + Q * S.llt().solve(y);
}

double min_eigenvalue(const CMatrix& A) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(A), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

struct Barrier {
  const MaxDetProblem& p;
  CMatrix G;      // H / sigma
  CMatrix Omega;
  bool sensing;

  double objective(const CMatrix& R) const {
    const auto m = G.rows();
    return log_det_hpd(CMatrix::Identity(m, m) + G * R * G.adjoint());
  }
  double s1(const CMatrix& R) const { return p.budget - std::real((Omega * R).trace()); }
  double s2(const CMatrix& R) const {
    return sensing ? std::real((p.Psi * R).trace()) - p.Gamma_0 : kInf;
  }
  double value(const CMatrix& R, double t) const {
    const double a = s1(R), b = s2(R);
    if (!(a > 0.0) || !(b > 0.0)) return kInf;
    const double ld = log_det_hpd(R);
    if (!std::isfinite(ld)) return kInf;
    double f = -t * objective(R) - ld - std::log(a);
    if (sensing) f -= std::log(b);
    return f;
  }
  CMatrix C(const CMatrix& R) const {
    const auto m = G.rows();
    const CMatrix A = CMatrix::Identity(m, m) + G * R * G.adjoint();
    return hermitian_part(G.adjoint() * A.llt().solve(G));
  }
};

// Lagrange dual function at multipliers (l1 for power, l2 for sensing):
// sup_{R >= 0} logdet(I + C R) - tr(A R) + l1 P - l2 Gamma_0 with
// A = l1 Omega - l2 Psi. For A > 0 the supremum is attained by water-filling
// on the eigenvalues g of A^{-1/2} C A^{-1/2}: sum over g > 1 of ln g - 1 + 1/g.
double dual_value(const MaxDetProblem& p, const CMatrix& C, const CMatrix& Omega, bool sensing, double l1,
                  double l2) {
  CMatrix A = l1 * Omega;
  if (sensing) A -= l2 * p.Psi;
  const HermitianEig ae = hermitian_eig(hermitian_part(A));
  const double amin = ae.values.minCoeff();
  if (!(amin > 1e-14 * std::max(1.0, ae.values.cwiseAbs().maxCoeff()))) return kInf;
  const CMatrix Ais = ae.vectors * ae.values.cwiseInverse().cwiseSqrt().cast<cd>().asDiagonal() *
                      ae.vectors.adjoint();
  const RVector g = hermitian_eig(hermitian_part(Ais * C * Ais)).values;
  double d = l1 * p.budget - (sensing ? l2 * p.Gamma_0 : 0.0);
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (g(i) > 1.0) d += std::log(g(i)) - 1.0 + 1.0 / g(i);
  return d;
}

// Minimizes a unimodal function over [lo, hi].
template <class F>
double golden_lin(F f, double a, double b, int iters) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

// Same, in log(x) for x in [lo, hi].
template <class F>
double golden_log(F f, double lo, double hi, int iters) {
  return std::exp(golden_lin([&](double u) { return f(std::exp(u)); }, std::log(lo), std::log(hi), iters));
}

// Upper bound on the relaxed optimum. The dual function is convex in the
// multipliers and finite only where l1 Omega - l2 Psi > 0, i.e. l1 > lam l2 with
// lam the largest generalized eigenvalue of (Psi, Omega). With lam > 0 the
// search runs over (l1, s), l2 = s l1 / lam, s in (0, 1), which maps that wedge
// to a box; both coordinates enter linearly for the other held fixed, so each
// line search stays convex.
double dual_bound(const MaxDetProblem& p, const CMatrix& C, const CMatrix& Omega, bool sensing, double l1,
                  double l2) {
  auto D = [&](double a, double b) { return dual_value(p, C, Omega, sensing, a, b); };
  double best = D(l1, l2);
  if (!sensing || !(l2 > 0.0)) {
    l1 = golden_log([&](double x) { return D(x, 0.0); }, l1 * 1e-3, l1 * 1e3, 80);
    return std::min(best, D(l1, 0.0));
  }
  const Eigen::LLT<CMatrix> ol(Omega);
  const CMatrix Li = ol.matrixL().solve(CMatrix::Identity(Omega.rows(), Omega.cols()));
  const double lam = hermitian_eig(hermitian_part(Li * p.Psi * Li.adjoint())).values.maxCoeff();
  if (!(lam > 0.0)) {
    for (int round = 0; round < 8; ++round) {
      l1 = golden_log([&](double x) { return D(x, l2); }, l1 * 1e-3, l1 * 1e3, 80);
      l2 = golden_log([&](double x) { return D(l1, x); }, l2 * 1e-3, l2 * 1e3, 80);
      best = std::min(best, D(l1, l2));
    }
    return best;
  }
  // s = 1 / (1 + e^-z); z in a wide window keeps s strictly inside (0, 1).
  auto s_of = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  double z = std::clamp(std::log(l2 * lam / std::max(l1 - l2 * lam, 1e-300 * l1)), -30.0, 30.0);
  if (!(l1 > l2 * lam)) z = 0.0;
  auto E = [&](double a, double zz) { return D(a, s_of(zz) * a / lam); };
  for (int round = 0; round < 20; ++round) {
    const double before = best;
    l1 = golden_log([&](double x) { return E(x, z); }, l1 * 1e-3, l1 * 1e3, 80);
    z = golden_lin([&](double zz) { return E(l1, zz); }, z - 20.0, z + 20.0, 80);
    best = std::min(best, E(l1, z));
    if (before - best <= 1e-13 * std::abs(best)) break;
  }
  return best;
}

}  // namespace

CMatrix MaxDetProblem::omega() const {
  return Omega.size() ? Omega : CMatrix(CMatrix::Identity(n(), n()));
}

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

SdpSolution solve_maxdet(const MaxDetProblem& problem, const SdpOptions& opt) {
  const int n = problem.n();
  if (n < 1) throw Error(ErrorKind::shape_mismatch, "solve_maxdet: empty channel");
  if (!(problem.sigma_c_sq > 0.0)) throw Error(ErrorKind::domain, "sigma_c_sq must be > 0");
  if (!(problem.budget >= 0.0)) throw Error(ErrorKind::domain, "power budget must be >= 0");
  if (!(opt.tol > 0.0)) throw Error(ErrorKind::configuration, "tol must be > 0");
  const bool sensing = problem.has_sensing();
  if (sensing && (problem.Psi.rows() != n || problem.Psi.cols() != n))
    throw Error(ErrorKind::shape_mismatch, "Psi must be n x n");
  const CMatrix Omega = hermitian_part(problem.omega());
  if (Omega.rows() != n || Omega.cols() != n) throw Error(ErrorKind::shape_mismatch, "Omega must be n x n");

  SdpSolution sol;
  sol.R = CMatrix::Zero(n, n);
  if (problem.budget == 0.0) {
    if (sensing && problem.Gamma_0 > 0.0) {
      sol.status = SdpStatus::infeasible;
      sol.message = "power budget is zero but the SCNR constraint needs tr(Psi R) > 0";
    } else {
      sol.status = SdpStatus::optimal;
    }
    return sol;
  }

  // Feasible start: mix the best sensing direction with a scaled identity.
  Eigen::LLT<CMatrix> omega_llt(Omega);
  if (omega_llt.info() != Eigen::Success) throw Error(ErrorKind::domain, "Omega must be positive definite");
  const double P = problem.budget;
  const double tr_omega = std::real(Omega.trace());
  CMatrix R = (P / (2.0 * tr_omega)) * CMatrix::Identity(n, n);
  if (sensing) {
    const CMatrix L = omega_llt.matrixL();
    const CMatrix Linv = L.triangularView<Eigen::Lower>().solve(CMatrix::Identity(n, n));
    const HermitianEig e = hermitian_eig(Linv * problem.Psi * Linv.adjoint());
    const double lam = e.values(0);
    if (!(P * lam > problem.Gamma_0)) {
      sol.status = SdpStatus::infeasible;
      sol.message = "SCNR constraint: budget * lambda_max = " + std::to_string(P * lam) +
                    " <= Gamma_0 = " + std::to_string(problem.Gamma_0);
      return sol;
    }
    const CVector u = Linv.adjoint() * e.vectors.col(0);
    const double tr_psi = std::real(problem.Psi.trace());
    double delta = 0.5;
    bool found = false;
    for (int i = 0; i < 60 && !found; ++i, delta *= 0.5) {
      const double s2 = (1.0 - delta) * P * lam + delta * P * tr_psi / (2.0 * tr_omega) - problem.Gamma_0;
      if (s2 > 0.0) {
        R = (1.0 - delta) * P * u * u.adjoint() + (delta * P / (2.0 * tr_omega)) * CMatrix::Identity(n, n);
        found = true;
      }
    }
    if (!found) {
      sol.status = SdpStatus::infeasible;
      sol.message = "SCNR constraint: no strictly feasible start found";
      return sol;
    }
  }

  const Barrier bar{problem, problem.H / std::sqrt(problem.sigma_c_sq), Omega, sensing};
  const double m = n + 1.0 + (sensing ? 1.0 : 0.0);
  double t = opt.t0;
  sol.status = SdpStatus::max_iter;
  const auto nn = static_cast<Eigen::Index>(n) * n;

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    int inner = 0;
    for (; inner < opt.max_newton; ++inner) {
      const CMatrix Rh = hermitian_sqrt(R);
      const double a = bar.s1(R), b = bar.s2(R);
      // Rh C Rh = F F^H with F = Rh G^H L^{-H}, A = L L^H: rank at most rows(G).
      const auto mG = bar.G.rows();
      const Eigen::LLT<CMatrix> A_llt(CMatrix::Identity(mG, mG) + bar.G * R * bar.G.adjoint());
      const CMatrix F = Rh * CMatrix(A_llt.matrixL().solve(bar.G)).adjoint();
      const CMatrix Cs = hermitian_part(F * F.adjoint());
      const CMatrix Os = hermitian_part(Rh * Omega * Rh);
      CMatrix grad = -t * Cs - CMatrix::Identity(n, n) + Os / a;
      const RMatrix J = congruence_factor(F);
      RMatrix Z(nn, J.cols() + (sensing ? 2 : 1));
      Z.leftCols(J.cols()) = std::sqrt(t) * J;
      Z.col(J.cols()) = coords(Os) / a;
      if (sensing) {
        const CMatrix Ps = hermitian_part(Rh * problem.Psi * Rh);
        grad -= Ps / b;
        Z.col(J.cols() + 1) = coords(Ps) / b;
      }
      const RVector g = coords(grad);
      const RVector dx = solve_identity_plus_lowrank(Z, -g);
      const double dec = -g.dot(dx);
      if (!(dec > 0.0) || dec / 2.0 < 1e-12) break;

      const CMatrix X = from_coords(dx, n);
      const double f0 = bar.value(R, t);
      double s = 1.0;
      CMatrix Rn;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, s *= 0.5) {
        const CMatrix I_sX = CMatrix::Identity(n, n) + s * X;
        if (I_sX.llt().info() != Eigen::Success) continue;
        Rn = hermitian_part(Rh * I_sX * Rh);
        const double f1 = bar.value(Rn, t);
        if (std::isfinite(f1) && f1 <= f0 - 0.25 * s * dec) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      R = Rn;
    }
    const double gap = m / t;
    sol.diagnostics.push_back({t, inner, bar.objective(R), gap, min_eigenvalue(R)});
    if (gap < opt.tol) {
      sol.status = SdpStatus::optimal;
      break;
    }
    t *= opt.mu;
  }

  sol.R = R;
  sol.objective_nats = bar.objective(R);
  sol.objective_bits = log2_from_ln(sol.objective_nats);
  const double a = bar.s1(R);
  {
    const CMatrix Cfull = hermitian_part(bar.G.adjoint() * bar.G);
    const double t_last = sol.diagnostics.empty() ? t : sol.diagnostics.back().outer_t;
    const double l1 = 1.0 / (t_last * a);
    const double l2 = sensing ? 1.0 / (t_last * bar.s2(R)) : 0.0;
    sol.dual_bound_nats = dual_bound(problem, Cfull, Omega, sensing, l1, l2);
  }
  const CMatrix C = bar.C(R);
  CMatrix dual = Omega / a - R.llt().solve(CMatrix::Identity(n, n));
  double viol = std::max(0.0, -a);
  if (sensing) {
    dual -= problem.Psi / bar.s2(R);
    viol = std::max(viol, std::max(0.0, -bar.s2(R)));
  }
  sol.kkt_residual = std::max((C - dual / t).norm() / (1.0 + C.norm()), viol);
  return sol;
}

RandomizationResult randomize_rank(const SdpSolution& solution, const MaxDetProblem& problem, int trials,
                                   std::uint64_t seed) {
  if (solution.status != SdpStatus::optimal)
    throw Error(ErrorKind::state, "randomize_rank needs an optimal SDP solution");
  const int n = problem.n();
  const int Ns = problem.Ns;
  if (Ns < 1 || Ns > n) throw Error(ErrorKind::configuration, "Ns: must lie in [1, n]");
  const HermitianEig e = hermitian_eig(solution.R);
  const CMatrix V = e.vectors.leftCols(Ns) * e.values.head(Ns).cwiseMax(0.0).cwiseSqrt().cast<cd>().asDiagonal();
  const CMatrix Omega = problem.omega();
  const CMatrix G = problem.H / std::sqrt(problem.sigma_c_sq);
  const bool sensing = problem.has_sensing();

  RandomizationResult best;
  best.se_bits = -kInf;
  for (int i = 0; i <= trials; ++i) {
    CMatrix W;
    if (i == 0) {
      W = V;
    } else {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      W = V * rng.complex_normal_matrix(Ns, Ns);
    }
    const double p = std::real((W.adjoint() * Omega * W).trace());
    if (!(p > 0.0)) continue;
    W *= std::sqrt(problem.budget / p);
    if (sensing && std::real((W.adjoint() * problem.Psi * W).trace()) < problem.Gamma_0) continue;
    ++best.candidates_feasible;
    const CMatrix A = CMatrix::Identity(Ns, Ns) + (G * W).adjoint() * (G * W);
    const double se = log2_from_ln(log_det_hpd(A));
    if (se > best.se_bits) {
      best.se_bits = se;
      best.W = W;
      best.ok = true;
    }
  }
  if (!best.ok) best.se_bits = 0.0;
  return best;
}

SdrResult sdr_rrs(const MaxDetProblem& problem, std::uint64_t seed, const SdpOptions& options) {
  SdrResult out;
  out.sdp = solve_maxdet(problem, options);
  out.fdb_bits = fdb_bound_bits(out.sdp);
  if (out.sdp.status == SdpStatus::infeasible) {
    out.status = "infeasible";
    return out;
  }
  if (out.sdp.status != SdpStatus::optimal) {
    out.status = "max_iter";
    return out;
  }
  RandomizationResult r = randomize_rank(out.sdp, problem, 10 * problem.Ns, seed);
  if (!r.ok) r = randomize_rank(out.sdp, problem, 100 * problem.Ns, seed);
  if (!r.ok) {
    out.status = "randomization_failed";
    return out;
  }
  out.W_BB = r.W;
  out.se_bits = r.se_bits;
  out.status = "ok";
  return out;
}

double fdb_upper_bound(const MaxDetProblem& problem, const SdpOptions& options) {
  return fdb_bound_bits(solve_maxdet(problem, options));
}

double fdb_bound_bits(const SdpSolution& s) {
  if (s.status == SdpStatus::infeasible) return std::numeric_limits<double>::quiet_NaN();
  // Weak duality always bounds the optimum; the barrier objective is a primal
  // value, so the bound can never be below it.
  return log2_from_ln(std::max(s.objective_nats, s.dual_bound_nats));
}

}  // namespace mxisac
