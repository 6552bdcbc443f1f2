// SPDX-License-Identifier: Apache-2.0
#include "mxisac/opt_manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mxisac/error.hpp"

namespace mxisac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RVector diag_real(const CMatrix& a) { return a.diagonal().real(); }

// c_i = [V^H B~ V]_ii, e_i = [V^H Phi~ V]_ii
struct Quad {
  RVector c;
  RVector e;
};

Quad quad(const ManifoldState& s, const EigB& eig) {
  Quad q;
  q.c = diag_real(s.V.adjoint() * eig.B_tilde * s.V);
  q.e = eig.sensing ? diag_real(s.V.adjoint() * eig.Phi_tilde * s.V) : RVector::Zero(s.b.size());
  return q;
}

void check_state(const ManifoldState& s, const EigB& eig) {
  if (s.V.rows() != eig.Ns() || s.V.cols() != eig.Ns() || s.b.size() != eig.Ns())
    throw Error(ErrorKind::shape_mismatch, "manifold state does not match N_s");
}

CMatrix comm(const CMatrix& A, const CMatrix& B) { return A * B - B * A; }

// Skew-Hermitian generators without the diagonal (column phases leave f unchanged).
std::vector<CMatrix> generators(int n) {
  std::vector<CMatrix> g;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      CMatrix a = CMatrix::Zero(n, n), c = CMatrix::Zero(n, n);
      a(i, j) = 1.0;
      a(j, i) = -1.0;
      c(i, j) = c(j, i) = cd(0.0, 1.0);
      g.push_back(a);
      g.push_back(c);
    }
  return g;
}

}  // namespace

LocalModel local_model(const ManifoldState& state, const EigB& eig, double t) {
  const auto [u1, u2] = slacks(state, eig);
  const int ns = eig.Ns();
  LocalModel m;
  m.gens = generators(ns);
  const int nv = static_cast<int>(m.gens.size());
  const RVector& b = state.b;
  const RVector b2 = b.cwiseAbs2();
  const Quad q = quad(state, eig);
  const CMatrix Mc = state.V.adjoint() * eig.B_tilde * state.V;
  const CMatrix Me = eig.sensing ? CMatrix(state.V.adjoint() * eig.Phi_tilde * state.V) : CMatrix::Zero(ns, ns);

  // Slack derivatives: u1 = budget - sum b_i^2 c_i, u2 = sum b_i^2 e_i - Gamma_0.
  std::vector<CMatrix> Cc(static_cast<std::size_t>(nv)), Ce(static_cast<std::size_t>(nv));
  RVector d1 = RVector::Zero(nv + ns), d2 = RVector::Zero(nv + ns);
  for (int a = 0; a < nv; ++a) {
    Cc[a] = comm(Mc, m.gens[a]);
    Ce[a] = comm(Me, m.gens[a]);
    d1(a) = -b2.dot(Cc[a].diagonal().real());
    d2(a) = b2.dot(Ce[a].diagonal().real());
  }
  for (int i = 0; i < ns; ++i) {
    d1(nv + i) = -2.0 * q.c(i) * b(i);
    d2(nv + i) = 2.0 * q.e(i) * b(i);
  }
  RMatrix h1 = RMatrix::Zero(nv + ns, nv + ns), h2 = RMatrix::Zero(nv + ns, nv + ns);
  for (int a = 0; a < nv; ++a) {
    for (int c = 0; c <= a; ++c) {
      const CMatrix Dc = 0.5 * (comm(Cc[a], m.gens[c]) + comm(Cc[c], m.gens[a]));
      const CMatrix De = 0.5 * (comm(Ce[a], m.gens[c]) + comm(Ce[c], m.gens[a]));
      h1(a, c) = h1(c, a) = -b2.dot(Dc.diagonal().real());
      h2(a, c) = h2(c, a) = b2.dot(De.diagonal().real());
    }
    for (int i = 0; i < ns; ++i) {
      h1(a, nv + i) = h1(nv + i, a) = -2.0 * b(i) * Cc[a](i, i).real();
      h2(a, nv + i) = h2(nv + i, a) = 2.0 * b(i) * Ce[a](i, i).real();
    }
  }
  for (int i = 0; i < ns; ++i) {
    h1(nv + i, nv + i) = -2.0 * q.c(i);
    h2(nv + i, nv + i) = 2.0 * q.e(i);
  }

  m.g = -(d1 / (t * u1));
  m.H = -(h1 / u1 - d1 * d1.transpose() / (u1 * u1)) / t;
  if (eig.sensing) {
    m.g -= d2 / (t * u2);
    m.H -= (h2 / u2 - d2 * d2.transpose() / (u2 * u2)) / t;
  }
  for (int i = 0; i < ns; ++i) {
    const double bb = b2(i);
    m.g(nv + i) -= 2.0 * b(i) / (1.0 + bb);
    m.H(nv + i, nv + i) -= 2.0 * (1.0 - bb) / ((1.0 + bb) * (1.0 + bb));
  }
  return m;
}

namespace {

// -(|H| + mu I)^{-1} g, where |H| takes eigenvalue magnitudes. Always a
// descent direction; mu is the Levenberg-Marquardt damping.
RVector damped_newton(const RMatrix& H, const RVector& g, double mu) {
  if (g.size() == 0) return g;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(H);
  const RVector lam = es.eigenvalues().cwiseAbs().array() + mu;
  const RMatrix& Q = es.eigenvectors();
  return -(Q * (Q.transpose() * g).cwiseQuotient(lam));
}

}  // namespace

EigB reduce_B(const CMatrix& H_eff, double sigma_c_sq, const CMatrix& Psi, double Gamma_0, double budget,
              int Ns, bool sensing) {
  if (!(sigma_c_sq > 0.0)) throw Error(ErrorKind::domain, "sigma_c_sq must be > 0");
  if (Psi.rows() != H_eff.cols() || Psi.cols() != H_eff.cols())
    throw Error(ErrorKind::shape_mismatch, "Psi must be N_RF x N_RF");
  if (Ns < 1) throw Error(ErrorKind::configuration, "Ns: must be >= 1");
  EigB e;
  e.B = hermitian_part(H_eff.adjoint() * H_eff / sigma_c_sq);
  const HermitianEig es = hermitian_eig(e.B);
  int rank = 0;
  const double top = es.values.size() ? es.values(0) : 0.0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (top > 0.0 && es.values(i) > 1e-10 * top) ++rank;
  if (Ns > rank)
    throw Error(ErrorKind::rank_deficiency,
                "N_s = " + std::to_string(Ns) + " exceeds rank(B); achievable N_s <= " + std::to_string(rank));
  e.U_B = es.vectors.leftCols(Ns);
  e.Sigma_B = es.values.head(Ns);
  e.T = e.U_B * e.Sigma_B.cwiseSqrt().cwiseInverse().asDiagonal();
  e.B_tilde = e.Sigma_B.cwiseInverse().asDiagonal().toDenseMatrix().cast<cd>();
  e.Psi = hermitian_part(Psi);
  e.Phi_tilde = hermitian_part(e.T.adjoint() * e.Psi * e.T);
  e.budget = budget;
  e.Gamma_0 = Gamma_0;
  e.sensing = sensing;
  return e;
}

CMatrix assemble_wbb(const EigB& eig, const ManifoldState& state) {
  check_state(state, eig);
  return eig.T * state.V * state.b.cast<cd>().asDiagonal();
}

std::pair<double, double> slacks(const ManifoldState& state, const EigB& eig) {
  check_state(state, eig);
  const Quad q = quad(state, eig);
  const RVector b2 = state.b.cwiseAbs2();
  const double u1 = eig.budget - q.c.dot(b2);
  const double u2 = eig.sensing ? q.e.dot(b2) - eig.Gamma_0 : kInf;
  return {u1, u2};
}

double barrier_value(const ManifoldState& state, const EigB& eig, double t) {
  const auto [u1, u2] = slacks(state, eig);
  if (!(u1 > 0.0) || !(u2 > 0.0) || !state.b.allFinite()) return kInf;
  double f = 0.0;
  for (Eigen::Index i = 0; i < state.b.size(); ++i) f -= std::log1p(state.b(i) * state.b(i));
  f -= std::log(u1) / t;
  if (eig.sensing) f -= std::log(u2) / t;
  return f;
}

RVector grad_b(const ManifoldState& state, const EigB& eig, double t) {
  const auto [u1, u2] = slacks(state, eig);
  if (!(u1 > 0.0) || !(u2 > 0.0)) throw Error(ErrorKind::domain, "grad_b evaluated at an infeasible point");
  const Quad q = quad(state, eig);
  const RVector& b = state.b;
  RVector g(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    g(i) = -2.0 * b(i) / (1.0 + b(i) * b(i)) + (2.0 / t) * (q.c(i) / u1) * b(i);
    if (eig.sensing) g(i) -= (2.0 / t) * (q.e(i) / u2) * b(i);
  }
  return g;
}

CMatrix grad_V(const ManifoldState& state, const EigB& eig, double t) {
  const auto [u1, u2] = slacks(state, eig);
  if (!(u1 > 0.0) || !(u2 > 0.0)) throw Error(ErrorKind::domain, "grad_V evaluated at an infeasible point");
  const auto S = state.b.cwiseAbs2().cast<cd>().asDiagonal();
  CMatrix G = (2.0 / (t * u1)) * (eig.B_tilde * state.V * S);
  if (eig.sensing) G -= (2.0 / (t * u2)) * (eig.Phi_tilde * state.V * S);
  return G;
}

CMatrix tangent_project(const CMatrix& V, const CMatrix& G) {
  const auto n = V.cols();
  if (V.rows() != n || G.rows() != n || G.cols() != n)
    throw Error(ErrorKind::shape_mismatch, "tangent_project expects square matrices of equal size");
  if ((V.adjoint() * V - CMatrix::Identity(n, n)).norm() > 1e-6)
    throw Error(ErrorKind::state, "tangent_project: V is not unitary");
  return -V * skew_part(V.adjoint() * G);
}

CMatrix stiefel_retract(const CMatrix& Z) {
  if (Z.rows() != Z.cols()) throw Error(ErrorKind::shape_mismatch, "stiefel_retract expects a square matrix");
  Eigen::JacobiSVD<CMatrix> svd(Z, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  if (s.size() == 0) return Z;
  if (!(s(0) > 0.0) || !Z.allFinite() || s(s.size() - 1) <= 1e-12 * s(0)) {
    // One retry with a tiny diagonal jitter before giving up.
    const CMatrix Zj = Z + 1e-9 * std::max(1.0, s(0)) * CMatrix::Identity(Z.rows(), Z.cols());
    Eigen::JacobiSVD<CMatrix> sj(Zj, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector& s2 = sj.singularValues();
    if (!Zj.allFinite() || !(s2(0) > 0.0) || s2(s2.size() - 1) <= 1e-12 * s2(0))
      throw Error(ErrorKind::retraction, "retraction of a numerically singular matrix");
    return sj.matrixU() * sj.matrixV().adjoint();
  }
  return svd.matrixU() * svd.matrixV().adjoint();
}

Phase1Result phase1_feasible(const EigB& eig, Rng* rng) {
  const int n = eig.Ns();
  Phase1Result out;
  if (!(eig.budget > 0.0)) {
    out.certificate = "power budget is zero";
    return out;
  }

  // Best single direction for the sensing form, expressed in V-coordinates.
  const CMatrix Psi_r = hermitian_part(eig.U_B.adjoint() * eig.Psi * eig.U_B);
  const HermitianEig pe = hermitian_eig(Psi_r);
  const double lam = pe.values(0);
  if (eig.sensing && !(eig.budget * lam > eig.Gamma_0)) {
    out.certificate = "P * lambda_max(U_B^H Psi U_B) = " + std::to_string(eig.budget * lam) +
                      " <= Gamma_0 = " + std::to_string(eig.Gamma_0);
    return out;
  }
  CVector v1 = eig.Sigma_B.cwiseSqrt().cast<cd>().asDiagonal() * pe.vectors.col(0);
  v1 /= v1.norm();

  CMatrix Z = rng ? rng->complex_normal_matrix(n, n) : CMatrix(CMatrix::Identity(n, n));
  Z.col(0) = v1;
  // A random or identity completion is full rank with probability one; guard the
  // identity case where v1 is parallel to e_j for some j > 0.
  if (!rng) {
    Eigen::Index j = 0;
    v1.cwiseAbs().maxCoeff(&j);
    if (j != 0) Z.col(j) = CVector::Unit(n, 0);
  }
  Eigen::HouseholderQR<CMatrix> qr(Z);
  CMatrix V = qr.householderQ() * CMatrix::Identity(n, n);
  V.col(0) *= std::polar(1.0, std::arg(V.col(0).dot(v1)));

  out.state.V = V;
  const Quad q = quad(out.state, eig);
  RVector base = RVector::Ones(n);
  if (rng)
    for (int i = 0; i < n; ++i) base(i) = rng->uniform(0.5, 1.5);

  double scale = 0.9;
  auto b_for = [&](double tau) {
    RVector u = (1.0 - tau) * base;
    u(0) += tau;
    const RVector b2 = scale * eig.budget * u / q.c.dot(u);
    return RVector(b2.cwiseSqrt());
  };
  auto sensing_ok = [&](const RVector& b) {
    return !eig.sensing || q.e.dot(b.cwiseAbs2()) - eig.Gamma_0 > 0.0;
  };

  RVector b = b_for(0.0);
  if (!sensing_ok(b)) {
    const double ratio = eig.Gamma_0 / (eig.budget * lam);
    if (scale <= ratio) scale = 0.5 * (1.0 + ratio);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 50 && hi - lo > 1e-6; ++it) {
      ++out.bisections;
      const double mid = 0.5 * (lo + hi);
      if (sensing_ok(b_for(mid)))
        hi = mid;
      else
        lo = mid;
    }
    // Step back from the boundary so the SCNR barrier starts well conditioned.
    b = b_for(hi + 0.5 * (1.0 - hi));
    if (!sensing_ok(b)) b = b_for(hi);
    if (!sensing_ok(b)) {
      out.certificate = "bisection did not reach a strictly feasible point";
      return out;
    }
  }
  out.state.b = b;
  out.feasible = std::isfinite(barrier_value(out.state, eig, 1.0));
  if (!out.feasible) out.certificate = "starting point is not strictly feasible";
  return out;
}

const char* to_string(ManifoldStatus s) {
  switch (s) {
    case ManifoldStatus::converged: return "converged";
    case ManifoldStatus::max_iter: return "max_iter";
    case ManifoldStatus::line_search_stalled: return "line_search_stalled";
  }
  return "unknown";
}

ManifoldResult rm_jgd(const EigB& eig, const ManifoldConfig& cfg, const ManifoldState& init) {
  if (!(cfg.barrier_t > 0.0) || cfg.max_iter < 0 || !(cfg.shrink > 0.0 && cfg.shrink < 1.0))
    throw Error(ErrorKind::configuration, "manifold config: invalid parameters");
  double t = cfg.barrier_t;
  ManifoldState s = init;
  double f = barrier_value(s, eig, t);
  if (!std::isfinite(f)) throw Error(ErrorKind::state, "rm_jgd: initial point is not strictly feasible");

  ManifoldResult out;
  out.trace.push_back({0, f, 0.0, 0.0, 0.0, 0.0});
  const int rounds = cfg.continuation ? cfg.continuation_rounds : 0;
  int iter = 0;

  for (int round = 0; round <= rounds; ++round) {
    if (round > 0) {
      t *= cfg.continuation_mu;
      f = barrier_value(s, eig, t);
    }
    ManifoldState prev;
    double mu = -1.0;
    CMatrix prev_xiV;
    RVector prev_xib;
    bool have_prev = false;
    out.status = ManifoldStatus::max_iter;
    for (int k = 0; k < cfg.max_iter; ++k) {
      const CMatrix gV = tangent_project(s.V, grad_V(s, eig, t));
      const RVector gb = grad_b(s, eig, t);
      const double nV = gV.squaredNorm(), nb = gb.squaredNorm();
      out.trace.back().grad_norm_V = std::sqrt(nV);
      out.trace.back().grad_norm_b = std::sqrt(nb);
      if (nV < cfg.eps_V && nb < cfg.eps_b) {
        out.status = ManifoldStatus::converged;
        break;
      }

      CMatrix xiV = gV;
      RVector xib = -gb;
      double step_V = cfg.initial_step, step_b = cfg.initial_step;
      // Predicted decrease per unit step, -<grad, direction>.
      double slope_V = nV, slope_b = nb;
      if (cfg.metric != ManifoldConfig::Metric::plain) {
        const LocalModel lm = local_model(s, eig, t);
        const auto nv = static_cast<Eigen::Index>(lm.gens.size());
        const Eigen::Index ns = gb.size();
        RVector d(nv + ns);
        // For fixed V the objective is convex in the powers p = b^2; the b
        // Hessian differs from the mapped p Hessian by 2 df/dp on the diagonal.
        // Where df/dp < 0 that term is spurious negative curvature, drop it.
        // Where df/dp > 0 it keeps vanishing streams well conditioned.
        RMatrix Hm = lm.H;
        const auto [u1, u2] = slacks(s, eig);
        const Quad qq = quad(s, eig);
        for (Eigen::Index i = 0; i < ns; ++i) {
          double fp = -1.0 / (1.0 + s.b(i) * s.b(i)) + qq.c(i) / (t * u1);
          if (eig.sensing) fp -= qq.e(i) / (t * u2);
          Hm(nv + i, nv + i) -= 2.0 * std::min(fp, 0.0);
        }
        // Levenberg-Marquardt damping, seeded from the first Hessian's scale.
        if (mu < 0.0) mu = 0.1 * std::max(1.0, Hm.cwiseAbs().maxCoeff());
        if (cfg.metric == ManifoldConfig::Metric::full) {
          d = damped_newton(Hm, lm.g, mu);
        } else {
          d.head(nv) = damped_newton(Hm.topLeftCorner(nv, nv), lm.g.head(nv), mu);
          d.tail(ns) = damped_newton(Hm.bottomRightCorner(ns, ns), lm.g.tail(ns), mu);
        }
        CMatrix Om = CMatrix::Zero(ns, ns);
        for (Eigen::Index a = 0; a < nv; ++a) Om += d(a) * lm.gens[static_cast<std::size_t>(a)];
        xiV = s.V * Om;
        xib = d.tail(ns);
        slope_V = -lm.g.head(nv).dot(d.head(nv));
        slope_b = -lm.g.tail(ns).dot(d.tail(ns));
      } else if (cfg.bb_step && have_prev) {
        // y is the change of the gradient, i.e. minus the change of xi.
        const CMatrix sV = s.V - prev.V;
        const RVector sb = s.b - prev.b;
        const double syV = -real_inner(sV, xiV - prev_xiV), syb = -sb.dot(xib - prev_xib);
        if (syV > 0.0) step_V = std::clamp(sV.squaredNorm() / syV, 1e-10, 1e10);
        if (syb > 0.0) step_b = std::clamp(sb.squaredNorm() / syb, 1e-10, 1e10);
      }

      const auto u_old = slacks(s, eig);
      ManifoldState next;
      double fn = kInf;
      bool accepted = false;
      while (std::max(step_V, step_b) >= cfg.min_step) {
        next.V = stiefel_retract(s.V + step_V * xiV);
        next.b = s.b + step_b * xib;
        fn = barrier_value(next, eig, t);
        const auto [n1, n2] = slacks(next, eig);
        const bool interior = n1 >= cfg.boundary_fraction * u_old.first && n2 >= cfg.boundary_fraction * u_old.second;
        if (interior && std::isfinite(fn) && fn < f &&
            fn <= f - cfg.slope * (step_V * slope_V + step_b * slope_b)) {
          accepted = true;
          break;
        }
        step_V *= cfg.shrink;
        step_b *= cfg.shrink;
      }
      if (!accepted) {
        out.status = ManifoldStatus::line_search_stalled;
        break;
      }
      // Relax the damping after a full step, tighten it after backtracking.
      if (mu > 0.0) mu = step_V == cfg.initial_step ? std::max(mu / 3.0, 1e-300) : mu * 4.0;
      prev = s;
      prev_xiV = xiV;
      prev_xib = xib;
      have_prev = true;
      s = next;
      f = fn;
      ++iter;
      out.trace.push_back({iter, f, 0.0, 0.0, step_V, step_b});
    }
  }
  if (out.status != ManifoldStatus::converged) {
    out.trace.back().grad_norm_V = tangent_project(s.V, grad_V(s, eig, t)).norm();
    out.trace.back().grad_norm_b = grad_b(s, eig, t).norm();
  }
  out.state = s;
  out.iterations = iter;
  out.W_BB = assemble_wbb(eig, s);
  return out;
}

}  // namespace mxisac
