// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "mxisac/beamform.hpp"
#include "mxisac/error.hpp"
#include "mxisac/opt_manifold.hpp"
#include "mxisac/scenario.hpp"
#include "oracles.hpp"

using namespace mxisac;

namespace {

const Prepared& desk() {
  static const Prepared p = prepare_scenario(desk_defaults());
  return p;
}

const EigB& desk_eig() {
  static const EigB e = desk().eig();
  return e;
}

// Diagonal channel with the given singular values, no sensing constraint.
EigB synthetic(const std::vector<double>& s, double budget) {
  const int n = static_cast<int>(s.size());
  CMatrix H = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) H(i, i) = s[i];
  return reduce_B(H, 1.0, CMatrix::Zero(n, n), 0.0, budget, n, false);
}

std::vector<ManifoldState> feasible_points(const EigB& eig, int count, std::uint64_t seed) {
  std::vector<ManifoldState> out;
  Rng rng(seed);
  while (static_cast<int>(out.size()) < count) {
    const Phase1Result p1 = phase1_feasible(eig, &rng);
    if (!p1.feasible) break;
    out.push_back(p1.state);
  }
  return out;
}

double se_bits(const ManifoldState& s) {
  double bits = 0.0;
  for (Eigen::Index i = 0; i < s.b.size(); ++i) bits += std::log2(1.0 + s.b(i) * s.b(i));
  return bits;
}

}  // namespace

TEST(ReduceB, IdentityGivesUnitSpectrum) {
  const EigB e = reduce_B(CMatrix::Identity(4, 4), 1.0, CMatrix::Zero(4, 4), 0.0, 1.0, 4, false);
  EXPECT_LT((e.U_B.adjoint() * e.U_B - CMatrix::Identity(4, 4)).norm(), 1e-12);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(e.Sigma_B(i), 1.0, 1e-12);
  EXPECT_LT((e.B_tilde - CMatrix::Identity(4, 4)).norm(), 1e-12);
}

TEST(ReduceB, FullRankReconstruction) {
  Rng rng(1);
  const CMatrix H = rng.complex_normal_matrix(6, 6);
  const EigB e = reduce_B(H, 0.5, CMatrix::Zero(6, 6), 0.0, 1.0, 6, false);
  const CMatrix rec = e.U_B * e.Sigma_B.cast<cd>().asDiagonal() * e.U_B.adjoint();
  EXPECT_LT((e.B - rec).norm(), 1e-8 * e.B.norm());
  EXPECT_LT((e.B - H.adjoint() * H / 0.5).norm(), 1e-10 * e.B.norm());
}

TEST(ReduceB, StreamCountAboveRankIsRejected) {
  Rng rng(2);
  const CMatrix H = rng.complex_normal_matrix(2, 5);
  try {
    reduce_B(H, 1.0, CMatrix::Zero(5, 5), 0.0, 1.0, 3, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::rank_deficiency);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

TEST(ReduceB, SensingQuadraticFormSurvivesReduction) {
  const EigB& e = desk_eig();
  EXPECT_LT((e.Phi_tilde - e.Phi_tilde.adjoint()).norm(), 1e-12 * e.Phi_tilde.norm());
  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    ManifoldState s{oracle::random_unitary(rng, e.Ns()), RVector::Random(e.Ns())};
    const CMatrix W = assemble_wbb(e, s);
    const double full = std::real((W.adjoint() * e.Psi * W).trace());
    const CMatrix Sb = s.b.cast<cd>().asDiagonal();
    const double reduced = std::real((Sb * s.V.adjoint() * e.Phi_tilde * s.V * Sb).trace());
    EXPECT_NEAR(reduced, full, 1e-9 * std::abs(full) + 1e-300);
  }
}

TEST(AssembleWbb, ZeroPowerGivesZero) {
  const EigB& e = desk_eig();
  const ManifoldState s{CMatrix::Identity(e.Ns(), e.Ns()), RVector::Zero(e.Ns())};
  EXPECT_EQ(assemble_wbb(e, s).norm(), 0.0);
}

TEST(AssembleWbb, IdentityDataPutsPowersOnTheDiagonal) {
  const EigB e = reduce_B(CMatrix::Identity(3, 3), 1.0, CMatrix::Zero(3, 3), 0.0, 1.0, 3, false);
  const ManifoldState s{CMatrix::Identity(3, 3), RVector::LinSpaced(3, 0.5, 1.5)};
  const CMatrix W = e.U_B.adjoint() * assemble_wbb(e, s);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(W(i, j)), i == j ? s.b(i) : 0.0, 1e-12);
}

TEST(AssembleWbb, DiagonalizesTheChannelForm) {
  const EigB& e = desk_eig();
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const ManifoldState s{oracle::random_unitary(rng, e.Ns()), RVector::Random(e.Ns())};
    const CMatrix W = assemble_wbb(e, s);
    const CMatrix D = W.adjoint() * e.B * W;
    const RVector b2 = s.b.cwiseAbs2();
    EXPECT_LT((D - CMatrix(b2.cast<cd>().asDiagonal())).norm(), 1e-8 * std::max(1.0, b2.norm()));
  }
}

TEST(Barrier, InfeasiblePowerIsInfinite) {
  const EigB& e = desk_eig();
  const ManifoldState s{CMatrix::Identity(e.Ns(), e.Ns()), RVector::Constant(e.Ns(), 1e6)};
  EXPECT_TRUE(std::isinf(barrier_value(s, e, 100.0)));
}

TEST(Barrier, BarrierTermsScaleWithInverseT) {
  const EigB& e = desk_eig();
  for (const auto& s : feasible_points(e, 5, 5)) {
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < s.b.size(); ++i) logdet -= std::log1p(s.b(i) * s.b(i));
    const double f10 = barrier_value(s, e, 10.0), f100 = barrier_value(s, e, 100.0);
    ASSERT_TRUE(std::isfinite(f10));
    EXPECT_NEAR(f10 - logdet, 10.0 * (f100 - logdet), 1e-9 * std::abs(f10 - logdet));
  }
}

TEST(Barrier, GrowingOneStreamLowersTheObjective) {
  const EigB e = synthetic({2.0, 1.0, 0.5}, 1.0);
  ManifoldState s{CMatrix::Identity(3, 3), RVector::Constant(3, 0.05)};
  double prev = barrier_value(s, e, 1e6);
  for (int i = 0; i < 10; ++i) {
    s.b(0) += 0.05;
    const double f = barrier_value(s, e, 1e6);
    ASSERT_TRUE(std::isfinite(f));
    EXPECT_LT(f, prev);
    prev = f;
  }
}

TEST(GradB, MatchesFiniteDifferences) {
  const EigB& e = desk_eig();
  const auto pts = feasible_points(e, 20, 6);
  ASSERT_EQ(pts.size(), 20u);
  for (const auto& s : pts) {
    const RVector g = grad_b(s, e, 100.0);
    const RVector fd = oracle::fd_gradient(
        [&](const RVector& b) { return barrier_value(ManifoldState{s.V, b}, e, 100.0); }, s.b);
    EXPECT_LT((g - fd).norm() / g.norm(), 1e-5);
  }
}

TEST(GradB, BarrierPartVanishesAsTGrows) {
  const EigB& e = desk_eig();
  for (const auto& s : feasible_points(e, 5, 7)) {
    RVector logdet(s.b.size());
    for (Eigen::Index i = 0; i < s.b.size(); ++i) logdet(i) = -2.0 * s.b(i) / (1.0 + s.b(i) * s.b(i));
    const double d2 = (grad_b(s, e, 1e2) - logdet).norm(), d6 = (grad_b(s, e, 1e6) - logdet).norm();
    EXPECT_NEAR(d6, d2 * 1e-4, 1e-9 * d2);
  }
}

TEST(GradB, InfeasiblePointIsADomainError) {
  const EigB& e = desk_eig();
  const ManifoldState s{CMatrix::Identity(e.Ns(), e.Ns()), RVector::Constant(e.Ns(), 1e6)};
  try {
    grad_b(s, e, 100.0);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::domain);
  }
}

TEST(GradV, MatchesFiniteDifferences) {
  const EigB& e = desk_eig();
  for (const auto& s : feasible_points(e, 20, 8)) {
    const CMatrix g = grad_V(s, e, 100.0);
    const CMatrix fd = oracle::fd_gradient(
        [&](const CMatrix& V) { return barrier_value(ManifoldState{V, s.b}, e, 100.0); }, s.V);
    EXPECT_LT((g - fd).norm() / g.norm(), 1e-5);
  }
}

TEST(GradV, ZeroPowerGivesZeroGradient) {
  const EigB e = synthetic({2.0, 1.0, 0.5}, 1.0);
  Rng rng(9);
  const ManifoldState s{oracle::random_unitary(rng, 3), RVector::Zero(3)};
  EXPECT_EQ(grad_V(s, e, 100.0).norm(), 0.0);
}

TEST(TangentProject, HermitianDirectionIsNormal) {
  Rng rng(10);
  const CMatrix V = oracle::random_unitary(rng, 4);
  const CMatrix A = rng.complex_normal_matrix(4, 4);
  EXPECT_LT(tangent_project(V, V * (A + A.adjoint())).norm(), 1e-12);
}

TEST(TangentProject, SkewDirectionIsAlreadyTangent) {
  Rng rng(11);
  const CMatrix V = oracle::random_unitary(rng, 4);
  const CMatrix A = rng.complex_normal_matrix(4, 4);
  const CMatrix S = A - A.adjoint();
  EXPECT_LT((tangent_project(V, V * S) + V * S).norm(), 1e-12);
}

TEST(TangentProject, RandomGradientGivesTangentDescentDirection) {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const CMatrix V = oracle::random_unitary(rng, 5);
    const CMatrix G = rng.complex_normal_matrix(5, 5);
    const CMatrix xi = tangent_project(V, G);
    EXPECT_LT((xi.adjoint() * V + V.adjoint() * xi).norm(), 1e-10);
    EXPECT_LE(real_inner(G, xi), 0.0);
  }
}

TEST(Retraction, ScaledIdentityAndUnitaryInputs) {
  EXPECT_LT((stiefel_retract(2.0 * CMatrix::Identity(3, 3)) - CMatrix::Identity(3, 3)).norm(), 1e-12);
  Rng rng(13);
  const CMatrix U = oracle::random_unitary(rng, 5);
  EXPECT_LT((stiefel_retract(U) - U).norm(), 1e-12);
}

TEST(Retraction, NearestUnitaryAmongSamples) {
  Rng rng(14);
  const CMatrix Z = rng.complex_normal_matrix(4, 4);
  const CMatrix P = stiefel_retract(Z);
  EXPECT_LT((P.adjoint() * P - CMatrix::Identity(4, 4)).norm(), 1e-10);
  const double best = (Z - P).norm();
  for (int t = 0; t < 1000; ++t) EXPECT_LE(best, (Z - oracle::random_unitary(rng, 4)).norm() + 1e-12);
}

TEST(Retraction, RankDeficientInputRecoversThroughJitter) {
  CMatrix Z = CMatrix::Identity(3, 3);
  Z(2, 2) = 0.0;
  const CMatrix P = stiefel_retract(Z);
  EXPECT_LT((P.adjoint() * P - CMatrix::Identity(3, 3)).norm(), 1e-10);
}

TEST(Retraction, NonFiniteInputIsRejected) {
  CMatrix Z = CMatrix::Identity(3, 3);
  Z(1, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    stiefel_retract(Z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::retraction);
  }
}

TEST(Phase1, WithoutSensingAnyPowerFeasibleStateWorks) {
  const EigB e = synthetic({2.0, 1.0, 0.5}, 0.4);
  const Phase1Result r = phase1_feasible(e);
  ASSERT_TRUE(r.feasible);
  EXPECT_GT(slacks(r.state, e).first, 0.0);
}

TEST(Phase1, UnreachableThresholdGivesCertificate) {
  EigB e = desk_eig();
  const CMatrix Pr = e.U_B.adjoint() * e.Psi * e.U_B;
  const double lam = Eigen::SelfAdjointEigenSolver<CMatrix>(Pr).eigenvalues().maxCoeff();
  e.Gamma_0 = 1e9 * e.budget * std::abs(lam);
  const Phase1Result r = phase1_feasible(e);
  EXPECT_FALSE(r.feasible);
  EXPECT_FALSE(r.certificate.empty());
}

TEST(Phase1, DeskScenarioIsStrictlyFeasible) {
  const EigB& e = desk_eig();
  const Phase1Result r = phase1_feasible(e);
  ASSERT_TRUE(r.feasible) << r.certificate;
  EXPECT_LT(r.bisections, 50);
  const auto [u1, u2] = slacks(r.state, e);
  EXPECT_GT(u1, 0.0);
  EXPECT_GT(u2, 0.0);
}

TEST(LocalModel, GradientMatchesFiniteDifferences) {
  const EigB& e = desk_eig();
  for (const auto& s : feasible_points(e, 5, 15)) {
    const LocalModel lm = local_model(s, e, 100.0);
    const auto n = static_cast<Eigen::Index>(lm.gens.size());
    const std::function<double(const RVector&)> f = [&](const RVector& x) {
      CMatrix X = CMatrix::Zero(e.Ns(), e.Ns());
      for (Eigen::Index a = 0; a < n; ++a) X += x(a) * lm.gens[a];
      const CMatrix V = s.V * X.exp();
      return barrier_value(ManifoldState{V, s.b + x.tail(e.Ns())}, e, 100.0);
    };
    const RVector fd = oracle::fd_gradient(f, RVector(RVector::Zero(n + e.Ns())));
    EXPECT_LT((lm.g - fd).norm() / lm.g.norm(), 1e-5);
    EXPECT_LT((lm.H - lm.H.transpose()).norm(), 1e-9 * lm.H.norm());
  }
}

TEST(RmJgd, InfeasibleStartIsRejected) {
  const EigB& e = desk_eig();
  const ManifoldState s{CMatrix::Identity(e.Ns(), e.Ns()), RVector::Constant(e.Ns(), 1e6)};
  try {
    rm_jgd(e, ManifoldConfig{}, s);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::state);
  }
}

TEST(RmJgd, StationaryStartReturnsImmediately) {
  const EigB& e = desk_eig();
  const Phase1Result p1 = phase1_feasible(e);
  ASSERT_TRUE(p1.feasible);
  const ManifoldResult first = rm_jgd(e, ManifoldConfig{}, p1.state);
  ASSERT_EQ(first.status, ManifoldStatus::converged);
  const ManifoldResult again = rm_jgd(e, ManifoldConfig{}, first.state);
  EXPECT_EQ(again.iterations, 0);
  EXPECT_EQ(again.status, ManifoldStatus::converged);
}

TEST(RmJgd, NoSensingApproachesWaterfilling) {
  const std::vector<double> s = {2.0, 1.5, 1.0, 0.5};
  const double budget = 1.0;
  const EigB e = synthetic(s, budget);
  const Phase1Result p1 = phase1_feasible(e);
  ASSERT_TRUE(p1.feasible);
  const ManifoldResult r = rm_jgd(e, ManifoldConfig{}, p1.state);
  EXPECT_EQ(r.status, ManifoldStatus::converged);
  std::vector<double> gains;
  for (double v : s) gains.push_back(v * v);
  const double wf = oracle::waterfilling_bits(gains, budget);
  const double got = se_bits(r.state);
  EXPECT_LE(got, wf + 1e-9);
  EXPECT_GT(got, 0.98 * wf);
  // Cross-check through the determinant formula on the synthetic channel.
  CMatrix H = CMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) H(i, i) = s[i];
  EXPECT_NEAR(spectral_efficiency_cov(H, r.W_BB * r.W_BB.adjoint(), 1.0), got, 1e-8);
}

TEST(RmJgd, DeskScenarioDescendsStrictlyAndConverges) {
  const EigB& e = desk_eig();
  const Phase1Result p1 = phase1_feasible(e);
  ASSERT_TRUE(p1.feasible);
  const ManifoldResult r = rm_jgd(e, ManifoldConfig{}, p1.state);
  EXPECT_EQ(r.status, ManifoldStatus::converged);
  EXPECT_LT(r.iterations, 500);
  ASSERT_GE(r.trace.size(), 2u);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LT(r.trace[i].f, r.trace[i - 1].f) << i;
  const auto [u1, u2] = slacks(r.state, e);
  EXPECT_GT(u1, 0.0);
  EXPECT_GT(u2, 0.0);
  EXPECT_LT((r.state.V.adjoint() * r.state.V - CMatrix::Identity(e.Ns(), e.Ns())).norm(), 1e-8);
  // Power proxy holds.
  EXPECT_LE(desk().basis.M * r.W_BB.squaredNorm(), e.Ns() + 1e-9);
}

TEST(RmJgd, PlainMetricStillDescends) {
  const EigB& e = desk_eig();
  const Phase1Result p1 = phase1_feasible(e);
  ManifoldConfig cfg;
  cfg.metric = ManifoldConfig::Metric::plain;
  cfg.max_iter = 50;
  const ManifoldResult r = rm_jgd(e, cfg, p1.state);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LT(r.trace[i].f, r.trace[i - 1].f);
}
