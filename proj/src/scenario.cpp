// SPDX-License-Identifier: Apache-2.0
#include "mxisac/scenario.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "mxisac/error.hpp"
#include "mxisac/io.hpp"

namespace mxisac {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double to_db(double x) { return x > 0.0 ? linear_to_db(x) : -std::numeric_limits<double>::infinity(); }

}  // namespace

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::rm_jgd: return "rm_jgd";
    case Algorithm::sdr_rrs: return "sdr_rrs";
    case Algorithm::fdb: return "fdb";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "rm-jgd" || s == "rm_jgd") return Algorithm::rm_jgd;
  if (s == "sdr-rrs" || s == "sdr_rrs") return Algorithm::sdr_rrs;
  if (s == "fdb") return Algorithm::fdb;
  throw Error(ErrorKind::configuration, "algorithm: unknown value '" + s + "'");
}

MaxDetProblem Prepared::maxdet() const {
  MaxDetProblem p;
  p.H = H_eff;
  p.sigma_c_sq = sigma_c_sq;
  p.budget = budget;
  p.Psi = Psi;
  p.Gamma_0 = phi.Gamma_0;
  p.sensing = sensing;
  p.Ns = Ns;
  return p;
}

EigB Prepared::eig() const { return reduce_B(H_eff, sigma_c_sq, Psi, phi.Gamma_0, budget, Ns, sensing); }

Prepared prepare_scenario(const ScenarioConfig& config, const PrepareOptions& options) {
  config.validate();
  Rng layout_rng(derive_seed(config.seed, seed_stream::layout));
  ArrayGeometry geometry = build_geometry(config, layout_reference_x(config, layout_rng));

  Rng path_rng(derive_seed(config.seed, seed_stream::paths));
  std::vector<PathSpec> paths = draw_paths(config, geometry, path_rng);
  CommChannel comm = build_comm_channel(geometry, std::move(paths), config.user, config.Nc);

  SensingScene scene{config.objects()};
  SensingResponses responses = sensing_responses(geometry, scene);

  const int M_RF = config.rf_per_subarray > 0 ? config.rf_per_subarray : config.Q() + config.Np;
  SubspaceBasis basis = build_subspace(geometry, comm, responses, priority_slots(config.Q(), config.Np, M_RF));
  CMatrix H_eff = comm.H() * basis.U_tilde;

  double sigma_c_sq = config.sigma_c_sq;
  if (options.received_snr_db) {
    const double rho = db_to_linear(*options.received_snr_db);
    sigma_c_sq = comm.H().squaredNorm() / (config.Nc * rho);
  }

  // Default stream count: channel rank, but only eigenmodes within 60 dB of
  // the strongest one. Weaker modes carry no rate and make B badly scaled.
  int Ns = config.Ns > 0 ? std::min(config.Ns, numerical_rank(H_eff, 1e-5))
                         : std::min(numerical_rank(comm.H(), 1e-8), numerical_rank(H_eff, 1e-3));
  Ns = std::min(Ns, basis.N_RF());
  if (Ns < 1) throw Error(ErrorKind::rank_deficiency, "effective channel has rank 0");

  const auto N = static_cast<Eigen::Index>(geometry.N());
  CVector w = mvdr_receive(responses, scene, CMatrix::Identity(N, N), config.sigma_s_sq);
  PhiSet phi = phi_matrices(basis, responses, w, config.scnr_threshold, config.sigma_s_sq);
  CMatrix Psi = sensing_form(phi, scene, config.scnr_threshold);

  return Prepared{config,
                  std::move(geometry),
                  std::move(comm),
                  std::move(scene),
                  std::move(responses),
                  std::move(basis),
                  std::move(H_eff),
                  Ns,
                  sigma_c_sq,
                  std::move(w),
                  std::move(phi),
                  std::move(Psi),
                  static_cast<double>(Ns) / config.M,
                  config.scnr_threshold > 0.0};
}

RunOutput run_prepared(const Prepared& pr, Algorithm algorithm, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioConfig& c = pr.config;
  RunOutput out;
  ResultRow& row = out.row;
  row.algorithm = to_string(algorithm);
  row.seed = c.seed;
  row.K = c.K;
  row.M = c.M;
  row.Nc = c.Nc;
  row.Np = c.Np;
  row.Q = c.Q();
  row.N_RF = pr.basis.N_RF();
  row.Ns = pr.Ns;
  row.layout = to_string(c.layout);
  row.spacing_factor = pr.geometry.subarray_spacing() / pr.geometry.element_spacing();
  row.user_r = c.user.r;
  row.scnr_threshold_db = c.scnr_threshold > 0.0 ? linear_to_db(c.scnr_threshold) : kNaN;
  row.sigma_c_sq = pr.sigma_c_sq;

  const CMatrix& Ut = pr.basis.U_tilde;
  CMatrix R_BB;
  bool solved = false;
  switch (algorithm) {
    case Algorithm::rm_jgd: {
      const EigB eig = pr.eig();
      Rng init_rng(derive_seed(c.seed, seed_stream::manifold_init));
      const Phase1Result p1 = phase1_feasible(eig, options.random_init ? &init_rng : nullptr);
      if (!p1.feasible) {
        row.status = "infeasible";
        break;
      }
      ManifoldResult mr = rm_jgd(eig, options.manifold, p1.state);
      out.W_BB = mr.W_BB;
      out.trace = std::move(mr.trace);
      row.iterations = mr.iterations;
      row.status = mr.status == ManifoldStatus::converged ? "ok" : to_string(mr.status);
      R_BB = out.W_BB * out.W_BB.adjoint();
      solved = true;
      break;
    }
    case Algorithm::sdr_rrs: {
      SdrResult sr = sdr_rrs(pr.maxdet(), derive_seed(c.seed, seed_stream::randomization), options.sdp);
      row.status = sr.status;
      for (const auto& d : sr.sdp.diagnostics) row.iterations += d.inner_iter;
      out.sdp = std::move(sr.sdp);
      if (row.status != "ok") break;
      out.W_BB = sr.W_BB;
      R_BB = out.W_BB * out.W_BB.adjoint();
      solved = true;
      break;
    }
    case Algorithm::fdb: {
      out.sdp = solve_maxdet(pr.maxdet(), options.sdp);
      for (const auto& d : out.sdp.diagnostics) row.iterations += d.inner_iter;
      row.status = out.sdp.status == SdpStatus::optimal ? "ok" : to_string(out.sdp.status);
      if (out.sdp.status != SdpStatus::optimal) break;
      R_BB = out.sdp.R;
      solved = true;
      break;
    }
  }

  if (solved) {
    out.R_X = hermitian_part(Ut * R_BB * Ut.adjoint());
    row.se_bits = algorithm == Algorithm::fdb ? fdb_bound_bits(out.sdp)
                                              : spectral_efficiency_cov(pr.H_eff, R_BB, pr.sigma_c_sq);
    row.power_exact = std::real(out.R_X.trace());
    row.power_proxy = c.M * std::real(R_BB.trace());
    row.scnr_fixed_db = to_db(scnr(pr.w_fixed, pr.responses, pr.scene, out.R_X, c.sigma_s_sq));
    out.w_star = mvdr_receive(pr.responses, pr.scene, out.R_X, c.sigma_s_sq);
    row.scnr_db = to_db(scnr(out.w_star, pr.responses, pr.scene, out.R_X, c.sigma_s_sq));
  } else {
    row.se_bits = row.scnr_db = row.scnr_fixed_db = row.power_exact = row.power_proxy = kNaN;
  }
  row.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RunOutput run_scenario(const ScenarioConfig& config, Algorithm algorithm, const RunOptions& options) {
  return run_prepared(prepare_scenario(config), algorithm, options);
}

std::string result_header() {
  return "algorithm,seed,K,M,Nc,Np,Q,N_RF,Ns,layout,spacing_factor,user_r_m,scnr_threshold_db,sigma_c_sq,"
         "se_bits,scnr_fixed_db,scnr_db,power_exact,power_proxy,iterations,status";
}

std::string result_line(const ResultRow& r) {
  std::string s;
  s += r.algorithm + "," + std::to_string(r.seed) + "," + std::to_string(r.K) + "," + std::to_string(r.M) + "," +
       std::to_string(r.Nc) + "," + std::to_string(r.Np) + "," + std::to_string(r.Q) + "," + std::to_string(r.N_RF) +
       "," + std::to_string(r.Ns) + "," + r.layout + ",";
  s += fmt_num(r.spacing_factor) + "," + fmt_num(r.user_r) + "," + fmt_num(r.scnr_threshold_db) + "," +
       fmt_num(r.sigma_c_sq) + ",";
  s += fmt_num(r.se_bits) + "," + fmt_num(r.scnr_fixed_db) + "," + fmt_num(r.scnr_db) + "," + fmt_num(r.power_exact) +
       "," + fmt_num(r.power_proxy) + "," + std::to_string(r.iterations) + "," + r.status;
  return s;
}

MusicRun run_music(const ScenarioConfig& config, const MusicGrid& grid, const RunOptions& options) {
  const Prepared pr = prepare_scenario(config);
  MusicRun out;
  out.truth = config.target.location.cartesian();
  SdrResult sr = sdr_rrs(pr.maxdet(), derive_seed(config.seed, seed_stream::randomization), options.sdp);
  if (sr.status != "ok") throw Error(ErrorKind::state, "transmit beamformer unavailable: " + sr.status);
  const CMatrix F = pr.basis.U_tilde * sr.W_BB;  // N x Ns
  const CMatrix R_X = F * F.adjoint();
  const auto& g0 = pr.responses.objects.front().g_t;
  const double a0 = config.target.alpha;
  out.target_snr_db = to_db(a0 * a0 * std::real(g0.dot(R_X * g0)) / config.sigma_s_sq);

  Rng rng(derive_seed(config.seed, seed_stream::echoes));
  const CMatrix S = rng.complex_normal_matrix(pr.Ns, config.snapshots_L);
  const CMatrix Y = simulate_echoes(pr.responses, pr.scene, F * S, config.sigma_s_sq, rng);
  const CMatrix En = noise_subspace(sample_covariance(Y), config.Q());
  out.result = music_spectrum(En, pr.geometry, grid);
  out.status = "ok";
  return out;
}

}  // namespace mxisac
