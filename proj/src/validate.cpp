// SPDX-License-Identifier: Apache-2.0
#include "mxisac/validate.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "mxisac/error.hpp"
#include "mxisac/io.hpp"
#include "mxisac/scenario.hpp"

namespace mxisac {

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << what << "; ";
    }
  }
};

using CheckFn = std::function<void(Outcome&)>;

ScenarioConfig desk(std::uint64_t seed) {
  ScenarioConfig c = desk_defaults();
  c.seed = seed;
  return c;
}

double fd_rel_error_b(const ManifoldState& s, const EigB& eig, double t) {
  const RVector g = grad_b(s, eig, t);
  RVector fd(g.size());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    ManifoldState p = s, m = s;
    p.b(i) += h;
    m.b(i) -= h;
    fd(i) = (barrier_value(p, eig, t) - barrier_value(m, eig, t)) / (2 * h);
  }
  return (fd - g).norm() / std::max(g.norm(), 1e-12);
}

double fd_rel_error_V(const ManifoldState& s, const EigB& eig, double t, const GradVFn& gv) {
  const CMatrix g = gv(s, eig, t);
  CMatrix fd(g.rows(), g.cols());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      double part[2];
      for (int k = 0; k < 2; ++k) {
        const cd dir = k == 0 ? cd(h, 0.0) : cd(0.0, h);
        ManifoldState p = s, m = s;
        p.V(i, j) += dir;
        m.V(i, j) -= dir;
        part[k] = (barrier_value(p, eig, t) - barrier_value(m, eig, t)) / (2 * h);
      }
      fd(i, j) = cd(part[0], part[1]);
    }
  return (fd - g).norm() / std::max(g.norm(), 1e-12);
}

}  // namespace

bool ValidateReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::string ValidateReport::text() const {
  std::ostringstream s;
  double total = 0.0;
  for (const auto& c : checks) {
    s << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << fmt_num(c.wall_ms) << " ms)";
    if (!c.detail.empty()) s << ": " << c.detail;
    s << "\n";
    total += c.wall_ms;
  }
  s << (all_passed() ? "all checks passed" : "some checks FAILED") << ", total " << fmt_num(total) << " ms\n";
  return s.str();
}

std::string ValidateReport::csv() const {
  std::string s = "check,passed,wall_ms,detail\n";
  for (const auto& c : checks) {
    std::string d = c.detail;
    for (char& ch : d)
      if (ch == ',' || ch == '\n') ch = ';';
    s += c.name + "," + (c.passed ? "1" : "0") + "," + fmt_num(c.wall_ms) + "," + d + "\n";
  }
  return s;
}

ValidateReport validate(const ValidateOptions& opt) {
  const int reps = opt.quick ? 3 : 10;
  const GradVFn gv = opt.grad_V_override ? opt.grad_V_override : GradVFn(grad_V);
  std::vector<std::pair<std::string, CheckFn>> list;

  list.emplace_back("geometry.mirror_and_unit_modulus", [&](Outcome& o) {
    const ScenarioConfig c = desk(opt.seed);
    const ArrayGeometry g = build_geometry(c);
    for (int k = 0; k < g.K(); ++k)
      for (int m = 0; m < g.M(); ++m) {
        const Point2 t = g.position(Side::tx, k, m), r = g.position(Side::rx, k, m);
        o.require(r.x == -t.x && r.y == -t.y, "rx is not the mirror of tx");
      }
    const ObjectResponse resp = sensing_response(g, c.target.location);
    o.require((resp.g_t.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12, "g_t not unit modulus");
    o.require((resp.g_r.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12, "g_r not unit modulus");
  });

  list.emplace_back("channel.rank_bounds", [&](Outcome& o) {
    for (int i = 0; i < reps * 2; ++i) {
      ScenarioConfig c = desk(derive_seed(opt.seed, 100 + i));
      Rng rng(c.seed);
      c.Np = 1 + static_cast<int>(rng.uniform(0.0, 4.0));
      c.Nc = 1 + static_cast<int>(rng.uniform(0.0, 8.0));
      const Prepared p = prepare_scenario(c);
      const int r = numerical_rank(p.comm.H(), 1e-8);
      const auto [lo, hi] = rank_bounds(c.Np, c.Nc, c.K);
      o.require(r >= lo && r <= hi, "rank " + std::to_string(r) + " outside [" + std::to_string(lo) + ", " +
                                        std::to_string(hi) + "]");
    }
  });

  list.emplace_back("channel.block_locality", [&](Outcome& o) {
    const ScenarioConfig c = desk(opt.seed);
    const Prepared p = prepare_scenario(c);
    const ArrayGeometry moved = p.geometry.with_reference_shift(2, 0.37 * p.geometry.wavelength());
    const PathGainModel gains{c.path_gain_ref, c.nlos_extra_loss_db};
    const CommChannel h2 =
        build_comm_channel(moved, resolve_paths(moved, p.comm.paths(), c.user.cartesian(), gains), c.user, c.Nc);
    const int M = c.M;
    for (int k = 0; k < c.K; ++k) {
      const bool same = p.comm.H().middleCols(k * M, M) == h2.H().middleCols(k * M, M);
      o.require(k == 2 ? !same : same, "block " + std::to_string(k) + " locality violated");
    }
  });

  list.emplace_back("channel.echo_linearity", [&](Outcome& o) {
    const ScenarioConfig c = desk(opt.seed);
    const Prepared p = prepare_scenario(c);
    Rng r(7);
    const CMatrix X1 = r.complex_normal_matrix(c.N(), 5), X2 = r.complex_normal_matrix(c.N(), 5);
    auto Y = [&](const CMatrix& X) {
      Rng e(99);
      return simulate_echoes(p.responses, p.scene, X, c.sigma_s_sq, e);
    };
    const CMatrix Z = CMatrix::Zero(c.N(), 5);
    const double err = (Y(X1 + X2) - Y(X1) - Y(X2) + Y(Z)).norm() / Y(X1 + X2).norm();
    o.require(err < 1e-12, "echo model not affine in X (" + fmt_num(err) + ")");
  });

  list.emplace_back("beamform.subspace_structure", [&](Outcome& o) {
    const Prepared p = prepare_scenario(desk(opt.seed));
    const SubspaceBasis& b = p.basis;
    for (int j = 0; j < b.N_RF(); ++j)
      o.require(b.U_tilde.col(j) == b.U.col(b.perm[static_cast<std::size_t>(j)]), "U P != U~");
    o.require(in_analog_set(optimal_analog(b), b.K, b.M), "U~ outside the analog set");
    const CMatrix P = column_space_projector(b.U, 1e-10);
    for (const auto& obj : p.responses.objects)
      o.require((obj.g_t - P * obj.g_t).norm() / obj.g_t.norm() < 1e-10, "g_t not in col(U)");
    const auto& sv = p.comm.svd();
    const int r = numerical_rank(p.comm.H(), 1e-8);
    for (int i = 0; i < r; ++i)
      o.require((sv.V.col(i) - P * sv.V.col(i)).norm() < 1e-8, "right singular vector not in col(U)");
  });

  list.emplace_back("beamform.reduced_equals_full", [&](Outcome& o) {
    const Prepared p = prepare_scenario(desk(opt.seed));
    Rng r(3);
    const CMatrix W = 0.1 * r.complex_normal_matrix(p.basis.N_RF(), p.Ns);
    const CMatrix Rx = p.basis.U_tilde * W * W.adjoint() * p.basis.U_tilde.adjoint();
    const double se_red = spectral_efficiency(p.comm.H(), p.basis.U_tilde, W, p.sigma_c_sq);
    const double se_full = spectral_efficiency_cov(p.comm.H(), Rx, p.sigma_c_sq);
    o.require(std::abs(se_red - se_full) <= 1e-8 * std::max(1.0, se_full), "SE mismatch");
    const double s_red = reduced_scnr(p.phi, p.scene, W, p.w_fixed, p.config.sigma_s_sq);
    const double s_full = scnr(p.w_fixed, p.responses, p.scene, Rx, p.config.sigma_s_sq);
    o.require(std::abs(s_red - s_full) <= 1e-8 * s_full, "SCNR mismatch");
  });

  list.emplace_back("beamform.mvdr_argmax", [&](Outcome& o) {
    const Prepared p = prepare_scenario(desk(opt.seed));
    const auto N = p.geometry.N();
    Rng r(11);
    const CMatrix Rx = [&] {
      const CMatrix A = r.complex_normal_matrix(N, 4);
      return CMatrix(A * A.adjoint());
    }();
    const CVector w = mvdr_receive(p.responses, p.scene, Rx, p.config.sigma_s_sq);
    const double best = scnr(w, p.responses, p.scene, Rx, p.config.sigma_s_sq);
    const int samples = opt.quick ? 200 : 2000;
    for (int i = 0; i < samples; ++i) {
      CVector v = r.complex_normal_matrix(N, 1);
      v /= v.norm();
      o.require(scnr(v, p.responses, p.scene, Rx, p.config.sigma_s_sq) <= best * (1 + 1e-9), "random w beats MVDR");
      if (!o.ok) break;
    }
  });

  list.emplace_back("manifold.gradients_match_finite_differences", [&](Outcome& o) {
    const Prepared p = prepare_scenario(desk(opt.seed));
    const EigB eig = p.eig();
    Rng rng(derive_seed(opt.seed, 5));
    double worst_b = 0.0, worst_V = 0.0;
    for (int i = 0; i < reps; ++i) {
      const Phase1Result p1 = phase1_feasible(eig, &rng);
      if (!p1.feasible) {
        o.require(false, "no feasible point: " + p1.certificate);
        return;
      }
      worst_b = std::max(worst_b, fd_rel_error_b(p1.state, eig, 100.0));
      worst_V = std::max(worst_V, fd_rel_error_V(p1.state, eig, 100.0, gv));
    }
    o.require(worst_b < 1e-5, "grad_b relative error " + fmt_num(worst_b));
    o.require(worst_V < 1e-5, "grad_V relative error " + fmt_num(worst_V));
  });

  list.emplace_back("manifold.diagonalizes_B", [&](Outcome& o) {
    const Prepared p = prepare_scenario(desk(opt.seed));
    const EigB eig = p.eig();
    Rng rng(derive_seed(opt.seed, 6));
    const Phase1Result p1 = phase1_feasible(eig, &rng);
    o.require(p1.feasible, "phase 1 failed");
    if (!p1.feasible) return;
    const CMatrix W = assemble_wbb(eig, p1.state);
    const CMatrix D = W.adjoint() * eig.B * W;
    const CMatrix off = D - CMatrix(D.diagonal().asDiagonal());
    o.require(off.norm() < 1e-8 * D.norm(), "W^H B W not diagonal");
    o.require((D.diagonal().real() - p1.state.b.cwiseAbs2()).norm() < 1e-8 * D.norm(), "diag != b^2");
  });

  list.emplace_back("manifold.monotone_feasible_descent", [&](Outcome& o) {
    const Prepared p = prepare_scenario(desk(opt.seed));
    const RunOutput r = run_prepared(p, Algorithm::rm_jgd);
    o.require(r.row.status != "infeasible", "phase 1 reported infeasible");
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      o.require(r.trace[i].f < r.trace[i - 1].f, "trace not strictly decreasing at " + std::to_string(i));
    o.require(r.row.power_proxy <= p.Ns * (1 + 1e-9), "proxy power exceeds N_s");
    const double s = reduced_scnr(p.phi, p.scene, r.W_BB, p.w_fixed, p.config.sigma_s_sq);
    o.require(s >= p.config.scnr_threshold, "reduced SCNR below threshold");
  });

  list.emplace_back("sdr.feasible_tight_and_bounded", [&](Outcome& o) {
    const Prepared p = prepare_scenario(desk(opt.seed));
    const MaxDetProblem prob = p.maxdet();
    const SdrResult s = sdr_rrs(prob, 5);
    o.require(s.status == "ok", "status " + s.status);
    if (s.status != "ok") return;
    const CMatrix& R = s.sdp.R;
    o.require(hermitian_eig(R).values.minCoeff() >= -1e-8 * std::real(R.trace()), "R not PSD");
    o.require(std::real(R.trace()) <= prob.budget + 1e-8, "trace budget violated");
    o.require(std::real((prob.Psi * R).trace()) >= prob.Gamma_0 - 1e-8, "SCNR constraint violated");
    o.require(std::abs(p.config.M * s.W_BB.squaredNorm() - p.Ns) < 1e-9 * p.Ns, "randomized W not power tight");
    o.require(s.se_bits <= s.fdb_bits, "randomized SE exceeds the dual bound");
  });

  list.emplace_back("harness.fdb_upper_bounds", [&](Outcome& o) {
    for (int i = 0; i < (opt.quick ? 1 : 3); ++i) {
      const Prepared p = prepare_scenario(desk(derive_seed(opt.seed, 200 + i)));
      const RunOutput f = run_prepared(p, Algorithm::fdb);
      const RunOutput a = run_prepared(p, Algorithm::rm_jgd);
      const RunOutput b = run_prepared(p, Algorithm::sdr_rrs);
      const double slack = 1e-6;
      if (a.row.status == "ok") o.require(f.row.se_bits >= a.row.se_bits - slack, "fdb < rm_jgd");
      if (b.row.status == "ok") o.require(f.row.se_bits >= b.row.se_bits - slack, "fdb < sdr_rrs");
    }
  });

  list.emplace_back("music.noise_basis_rotation_invariance", [&](Outcome& o) {
    const Prepared p = prepare_scenario(desk(opt.seed));
    Rng r(13);
    const CMatrix A = r.complex_normal_matrix(p.geometry.N(), 3);
    const CMatrix En = noise_subspace(sample_covariance(A), 3);
    const CMatrix Q = polar_factor(r.complex_normal_matrix(En.cols(), En.cols()));
    const MusicGrid grid = parse_grid("5:2.5:15,10:2.5:20");
    const MusicResult s1 = music_spectrum(En, p.geometry, grid), s2 = music_spectrum(En * Q, p.geometry, grid);
    o.require((s1.spectrum - s2.spectrum).cwiseAbs().maxCoeff() < 1e-10, "spectrum depends on the basis");
  });

  list.emplace_back("harness.determinism", [&](Outcome& o) {
    const ScenarioConfig c = desk(opt.seed);
    for (Algorithm a : {Algorithm::rm_jgd, Algorithm::sdr_rrs}) {
      const std::string l1 = result_line(run_scenario(c, a).row), l2 = result_line(run_scenario(c, a).row);
      o.require(l1 == l2, std::string(to_string(a)) + " rows differ");
    }
  });

  ValidateReport report;
  for (auto& [name, fn] : list) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << "exception: " << e.what();
    }
    CheckResult cr;
    cr.name = name;
    cr.passed = o.ok;
    cr.detail = o.detail.str();
    cr.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.checks.push_back(std::move(cr));
  }
  return report;
}

}  // namespace mxisac
