// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mxisac/beamform.hpp"
#include "mxisac/music.hpp"
#include "mxisac/opt_manifold.hpp"
#include "mxisac/opt_sdr.hpp"

namespace mxisac {

enum class Algorithm { rm_jgd, sdr_rrs, fdb };
const char* to_string(Algorithm a);
/// Accepts both "rm-jgd" and "rm_jgd" spellings.
Algorithm algorithm_from_string(const std::string& s);

/// Child-seed indices derived from the scenario seed.
namespace seed_stream {
inline constexpr std::uint64_t layout = 1;
inline constexpr std::uint64_t paths = 2;
inline constexpr std::uint64_t manifold_init = 3;
inline constexpr std::uint64_t randomization = 4;
inline constexpr std::uint64_t echoes = 5;
}  // namespace seed_stream

struct PrepareOptions {
  /// Received SNR rho in dB. When set, sigma_c^2 = ||H_c||_F^2 / (Nc rho),
  /// overriding config.sigma_c_sq.
  std::optional<double> received_snr_db;
};

/// Everything up to (but excluding) the digital beamformer: geometry, channel,
/// responses, subspace, fixed MVDR filter from R_X = I, and the Phi matrices.
struct Prepared {
  ScenarioConfig config;
  ArrayGeometry geometry;
  CommChannel comm;
  SensingScene scene;
  SensingResponses responses;
  SubspaceBasis basis;
  CMatrix H_eff;       ///< H_c U~
  int Ns = 1;
  double sigma_c_sq = 1.0;
  CVector w_fixed;
  PhiSet phi;
  CMatrix Psi;
  double budget = 0.0;  ///< N_s / M
  bool sensing = true;

  MaxDetProblem maxdet() const;
  EigB eig() const;
};

Prepared prepare_scenario(const ScenarioConfig& config, const PrepareOptions& options = {});

struct RunOptions {
  ManifoldConfig manifold;
  SdpOptions sdp;
  bool random_init = false;  ///< randomized phase-1 start for the manifold solver
};

struct ResultRow {
  std::string algorithm;
  std::uint64_t seed = 0;
  int K = 0, M = 0, Nc = 0, Np = 0, Q = 0, N_RF = 0, Ns = 0;
  std::string layout;
  double spacing_factor = 0.0;
  double user_r = 0.0;
  double scnr_threshold_db = 0.0;
  double sigma_c_sq = 0.0;
  double se_bits = 0.0;
  double scnr_fixed_db = 0.0;  ///< SCNR of the solved R_X under the fixed filter
  double scnr_db = 0.0;        ///< SCNR under the refreshed MVDR filter
  double power_exact = 0.0;
  double power_proxy = 0.0;
  int iterations = 0;
  std::string status;
  double wall_time_ms = 0.0;
};

struct RunOutput {
  ResultRow row;
  CMatrix W_BB;  ///< empty for fdb
  CMatrix R_X;
  CVector w_star;
  std::vector<TraceRow> trace;
  SdpSolution sdp;
};

RunOutput run_prepared(const Prepared& prepared, Algorithm algorithm, const RunOptions& options = {});
RunOutput run_scenario(const ScenarioConfig& config, Algorithm algorithm, const RunOptions& options = {});

/// CSV header and one line (no trailing newline) for ResultRow, excluding wall time.
std::string result_header();
std::string result_line(const ResultRow& row);

struct MusicRun {
  MusicResult result;
  Point2 truth;
  double target_snr_db = 0.0;  ///< per-antenna echo power of the target over sigma_s^2
  std::string status;
};

/// Snapshots from the SDR-RRS beamformer, sample covariance, MUSIC with Q
/// assumed sources.
MusicRun run_music(const ScenarioConfig& config, const MusicGrid& grid, const RunOptions& options = {});

}  // namespace mxisac
