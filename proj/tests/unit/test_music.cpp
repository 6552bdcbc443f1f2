// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "mxisac/channel.hpp"
#include "mxisac/error.hpp"
#include "mxisac/music.hpp"
#include "mxisac/scenario.hpp"
#include "oracles.hpp"

using namespace mxisac;

namespace {

ArrayGeometry desk_geometry() { return build_geometry(desk_defaults()); }

}  // namespace

TEST(SampleCovariance, SingleSnapshotIsOuterProduct) {
  Rng rng(1);
  const CMatrix y = rng.complex_normal_matrix(6, 1);
  EXPECT_LT((sample_covariance(y) - y * y.adjoint()).norm(), 1e-14);
}

TEST(SampleCovariance, WhiteNoiseConcentrates) {
  Rng rng(2);
  const double s2 = 0.3;
  const CMatrix Y = std::sqrt(s2) * rng.complex_normal_matrix(8, 10000);
  const CMatrix R = sample_covariance(Y);
  EXPECT_LT((R - s2 * CMatrix::Identity(8, 8)).norm() / (s2 * std::sqrt(8.0)), 0.05);
  EXPECT_LT((R - R.adjoint()).norm(), 1e-14);
}

TEST(SampleCovariance, RankOneSnapshotsGiveRankOne) {
  Rng rng(3);
  const CVector g = rng.complex_normal_matrix(7, 1).col(0);
  const CVector s = rng.complex_normal_matrix(20, 1).col(0);
  EXPECT_EQ(numerical_rank(sample_covariance(g * s.transpose())), 1);
}

TEST(NoiseSubspace, IdentityGivesOrthonormalComplement) {
  const CMatrix E = noise_subspace(CMatrix::Identity(6, 6), 2);
  ASSERT_EQ(E.cols(), 4);
  EXPECT_LT((E.adjoint() * E - CMatrix::Identity(4, 4)).norm(), 1e-10);
}

TEST(NoiseSubspace, RankOnePlusIdentityIsOrthogonalToTheSource) {
  Rng rng(4);
  CVector g = rng.complex_normal_matrix(8, 1).col(0);
  const CMatrix cov = g * g.adjoint() + 1e-3 * CMatrix::Identity(8, 8);
  const CMatrix E = noise_subspace(cov, 1);
  g.normalize();
  EXPECT_LT((E.adjoint() * g).norm(), 1e-6);
}

TEST(NoiseSubspace, OrthogonalToSignalEigenvectors) {
  Rng rng(5);
  const CMatrix A = rng.complex_normal_matrix(8, 3);
  const CMatrix cov = A * A.adjoint() + 0.1 * CMatrix::Identity(8, 8);
  const CMatrix E = noise_subspace(cov, 3);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(cov);
  const CMatrix S = es.eigenvectors().rightCols(3);
  EXPECT_LT((E.adjoint() * S).norm(), 1e-10);
}

TEST(Grid, ParsesRangesAndRejectsBadSteps) {
  const MusicGrid g = parse_grid("0:0.5:2,10:0.25:11");
  EXPECT_EQ(g.nx(), 5);
  EXPECT_EQ(g.ny(), 5);
  EXPECT_DOUBLE_EQ(g.x(4), 2.0);
  EXPECT_DOUBLE_EQ(g.y(2), 10.5);
  EXPECT_THROW(parse_grid("0:0:2,0:1:2"), Error);
  EXPECT_THROW(parse_grid("0:1:2"), Error);
  EXPECT_THROW(parse_grid("3:1:2,0:1:2"), Error);
}

TEST(MusicSpectrum, NoiselessSourceAtAGridNodePeaksThere) {
  const ArrayGeometry g = desk_geometry();
  const MusicGrid grid = parse_grid("5:0.25:15,15:0.25:25");
  const Point2 truth{10.0, 20.0};
  const CVector gr = sensing_response(g, truth).g_r;
  const CMatrix E = noise_subspace(gr * gr.adjoint(), 1);
  const MusicResult r = music_spectrum(E, g, grid);
  EXPECT_DOUBLE_EQ(r.peak.x, truth.x);
  EXPECT_DOUBLE_EQ(r.peak.y, truth.y);
  EXPECT_EQ(r.spectrum.maxCoeff(), 1.0);
  EXPECT_GE(r.spectrum.minCoeff(), 0.0);
  EXPECT_GT(r.mainlobe_width, 0.0);
}

TEST(MusicSpectrum, InvariantToNoiseBasisRotation) {
  const ArrayGeometry g = desk_geometry();
  const MusicGrid grid = parse_grid("5:0.5:15,15:0.5:25");
  Rng rng(6);
  const CMatrix A = rng.complex_normal_matrix(g.N(), 2);
  const CMatrix E = noise_subspace(A * A.adjoint() + 1e-2 * CMatrix::Identity(g.N(), g.N()), 2);
  const CMatrix U = oracle::random_unitary(rng, static_cast<int>(E.cols()));
  const MusicResult a = music_spectrum(E, g, grid), b = music_spectrum(E * U, g, grid);
  EXPECT_LT((a.spectrum - b.spectrum).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(MusicSpectrum, CellOnAnAntennaIsFlagged) {
  const ArrayGeometry g = desk_geometry();
  const Point2 ant = g.position(Side::rx, 0, 0);
  MusicGrid grid;
  grid.x0 = ant.x;
  grid.x1 = ant.x + 1.0;
  grid.dx = 0.5;
  grid.y0 = 0.0;
  grid.y1 = 1.0;
  grid.dy = 0.5;
  Rng rng(7);
  const CMatrix A = rng.complex_normal_matrix(g.N(), 1);
  const MusicResult r = music_spectrum(noise_subspace(A * A.adjoint(), 1), g, grid);
  EXPECT_GE(r.flagged_cells, 1);
  EXPECT_EQ(r.spectrum(0, 0), 0.0);
}

TEST(MusicRun, DeskTargetFoundWithinOneCell) {
  ScenarioConfig c = desk_defaults();
  c.target = SensingObject{{20.0, kPi / 4}, 0.03};
  const MusicGrid grid = parse_grid("10:0.25:18,10:0.25:18");
  const MusicRun m = run_music(c, grid);
  ASSERT_EQ(m.status, "ok");
  EXPECT_GT(m.target_snr_db, 20.0);
  EXPECT_LE(std::abs(m.result.peak.x - m.truth.x), 0.25);
  EXPECT_LE(std::abs(m.result.peak.y - m.truth.y), 0.25);
}
