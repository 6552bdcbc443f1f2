// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mxisac/beamform.hpp"
#include "mxisac/channel.hpp"
#include "mxisac/error.hpp"
#include "mxisac/geometry.hpp"
#include "mxisac/music.hpp"
#include "mxisac/opt_manifold.hpp"
#include "mxisac/opt_sdr.hpp"
#include "mxisac/scenario.hpp"
#include "mxisac/sweep.hpp"
#include "oracles.hpp"

using namespace mxisac;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // wall-clock limit that is part of the criterion; <= 0 means none
  std::function<Verdict()> body;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ScenarioConfig desk(std::uint64_t seed) {
  ScenarioConfig c = desk_defaults();
  c.seed = seed;
  return c;
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::min(hi, lo + static_cast<int>(std::floor(rng.uniform(0.0, hi - lo + 1.0))));
}

double rel_err(double a, double ref) { return std::abs(a - ref) / std::max(std::abs(ref), 1e-300); }

int svd_rank(const CMatrix& a, double tol = 1e-8) {
  Eigen::BDCSVD<CMatrix> s(a);
  const RVector sv = s.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > tol * sv(0);
  return r;
}

// 1. No sensing: fdb and sdr_rrs against waterfilling on the reduced channel.
Verdict waterfilling_limit() {
  double worst_fdb = 0.0, worst_sdr = 0.0;
  int bad = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    ScenarioConfig c = desk(s);
    c.scnr_threshold = 0.0;
    const Prepared p = prepare_scenario(c);
    const double wf = oracle::waterfilling_bits(oracle::channel_gains(p.H_eff, p.sigma_c_sq), p.budget);
    const RunOutput f = run_prepared(p, Algorithm::fdb);
    const RunOutput r = run_prepared(p, Algorithm::sdr_rrs);
    const double ef = std::abs(f.row.se_bits - wf), er = rel_err(r.row.se_bits, wf);
    worst_fdb = std::max(worst_fdb, ef);
    worst_sdr = std::max(worst_sdr, er);
    bad += !(f.row.status == "ok" && r.row.status == "ok" && ef <= 1e-3 && er <= 0.02);
  }
  return {bad == 0, "max |fdb-wf|=" + fmt("%.2e", worst_fdb) + " bits, max sdr rel gap=" +
                        fmt("%.2e", worst_sdr) + ", failing channels=" + std::to_string(bad) + "/20"};
}

// 2. Analytic gradients against central differences at strictly feasible points.
Verdict gradient_fidelity() {
  double worst_b = 0.0, worst_V = 0.0;
  int points = 0;
  const double ts[] = {10.0, 100.0, 1000.0};
  for (std::uint64_t s = 1; points < 20 && s < 200; ++s) {
    const Prepared p = prepare_scenario(desk(s));
    EigB e;
    try {
      e = p.eig();
    } catch (const Error&) {
      continue;
    }
    Rng rng(derive_seed(s, 77));
    const Phase1Result p1 = phase1_feasible(e, &rng);
    if (!p1.feasible) continue;
    const ManifoldState st = p1.state;
    const double t = ts[points % 3];
    const RVector gb = grad_b(st, e, t);
    const RVector fb = oracle::fd_gradient(
        std::function<double(const RVector&)>(
            [&](const RVector& b) { return barrier_value(ManifoldState{st.V, b}, e, t); }),
        st.b);
    const CMatrix gV = grad_V(st, e, t);
    const CMatrix fV = oracle::fd_gradient(
        std::function<double(const CMatrix&)>(
            [&](const CMatrix& V) { return barrier_value(ManifoldState{V, st.b}, e, t); }),
        st.V);
    worst_b = std::max(worst_b, (gb - fb).norm() / fb.norm());
    worst_V = std::max(worst_V, (gV - fV).norm() / fV.norm());
    ++points;
  }
  const bool ok = points == 20 && worst_b < 1e-5 && worst_V < 1e-5;
  return {ok, std::to_string(points) + " points, max rel err grad_b=" + fmt("%.2e", worst_b) +
                  " grad_V=" + fmt("%.2e", worst_V)};
}

// 3. Full N-dimensional relaxation versus the subspace-restricted one.
Verdict subspace_exactness() {
  double worst_gap = 0.0, worst_res = 0.0;
  int solved = 0, bad = 0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    ScenarioConfig c = desk(s);
    c.K = 3;  // N = 24
    c.spacing_factor = 32.0;
    const Prepared p = prepare_scenario(c);
    const double Gs = p.config.scnr_threshold, s2 = p.config.sigma_s_sq;

    MaxDetProblem full;
    full.H = p.comm.H();
    full.sigma_c_sq = p.sigma_c_sq;
    full.budget = p.Ns;  // exact radiated power
    const PhiSet phf = phi_matrices_full(p.responses, p.w_fixed, Gs, s2);
    full.Psi = sensing_form(phf, p.scene, Gs);
    full.Gamma_0 = phf.Gamma_0;
    full.sensing = p.sensing;
    full.Ns = p.Ns;

    MaxDetProblem red = p.maxdet();
    const CMatrix& Ut = p.basis.U_tilde;
    red.Omega = Ut.adjoint() * Ut;
    red.budget = p.Ns;

    const SdpSolution a = solve_maxdet(full), b = solve_maxdet(red);
    if (a.status != SdpStatus::optimal || b.status != SdpStatus::optimal) {
      ++bad;
      continue;
    }
    ++solved;
    const double gap = std::abs(a.objective_bits - b.objective_bits);
    const double res = verify_covariance_subspace(a.R, p.basis);
    worst_gap = std::max(worst_gap, gap);
    worst_res = std::max(worst_res, res);
    bad += !(gap < 1e-4 && res < 1e-6);
  }
  return {bad == 0 && solved == 3, std::to_string(solved) + "/3 solved, max SE gap=" + fmt("%.2e", worst_gap) +
                                       " bits, max off-subspace residual=" + fmt("%.2e", worst_res)};
}

// 4. Channel rank bounds on random geometries, and the shared-arrival-angle floor.
Verdict rank_bounds_hold() {
  int bad = 0, at_upper = 0;
  Rng meta(4242);
  for (int i = 0; i < 100; ++i) {
    ScenarioConfig c = desk_defaults();
    c.K = uniform_int(meta, 1, 6);
    c.M = uniform_int(meta, 2, 8);
    c.spacing_factor = c.M * meta.uniform(1.0, 8.0);
    c.Nc = uniform_int(meta, 1, 12);
    c.Np = uniform_int(meta, 1, 4);
    c.user = PolarPoint{meta.uniform(8.0, 60.0), meta.uniform(-1.0, 1.0)};
    c.seed = derive_seed(4242, static_cast<std::uint64_t>(i));
    const ArrayGeometry g = build_geometry(c);
    Rng rng(c.seed);
    const CommChannel ch = build_comm_channel(g, draw_paths(c, g, rng), c.user, c.Nc);
    const auto [lo, hi] = rank_bounds(c.Np, c.Nc, c.K);
    const int r = svd_rank(ch.H());
    bad += r < lo || r > hi;
    at_upper += r == hi;
  }
  // Every subarray sees each path at the same arrival angle: rank drops to Np.
  int shared_bad = 0;
  for (int Np = 1; Np <= 3; ++Np) {
    ScenarioConfig c = desk_defaults();
    c.Np = Np;
    c.Nc = 8;
    const ArrayGeometry g = build_geometry(c);
    Rng rng(90 + Np);
    std::vector<PathSpec> paths = draw_paths(c, g, rng);
    for (PathSpec& ps : paths) std::fill(ps.aoa.begin(), ps.aoa.end(), ps.aoa.front());
    const CommChannel ch = build_comm_channel(g, paths, c.user, c.Nc);
    shared_bad += svd_rank(ch.H()) != rank_bounds(Np, c.Nc, c.K).first;
  }
  return {bad == 0 && shared_bad == 0, "random geometries out of bounds=" + std::to_string(bad) +
                                           "/100 (at upper bound " + std::to_string(at_upper) +
                                           "), shared-angle cases off the floor=" + std::to_string(shared_bad) + "/3"};
}

// 5. Monotone descent and termination of the manifold solver.
Verdict manifold_convergence() {
  int runs = 0, bad = 0, max_it = 0, instances = 0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const Prepared p = prepare_scenario(desk(s));
    EigB e;
    try {
      e = p.eig();
    } catch (const Error&) {
      continue;
    }
    const Phase1Result det = phase1_feasible(e);
    if (!det.feasible) continue;
    ++instances;
    std::vector<ManifoldState> inits{det.state};
    Rng rng(derive_seed(s, seed_stream::manifold_init));
    while (inits.size() < 3) {
      const Phase1Result r = phase1_feasible(e, &rng);
      if (!r.feasible) break;
      inits.push_back(r.state);
    }
    for (double t : {10.0, 100.0, 1000.0}) {
      for (const ManifoldState& init : inits) {
        ManifoldConfig cfg;
        cfg.barrier_t = t;
        const ManifoldResult m = rm_jgd(e, cfg, init);
        bool ok = m.status == ManifoldStatus::converged && m.iterations < 500;
        for (std::size_t i = 1; i < m.trace.size(); ++i) ok = ok && m.trace[i].f < m.trace[i - 1].f;
        bad += !ok;
        ++runs;
        max_it = std::max(max_it, m.iterations);
      }
    }
  }
  return {bad == 0 && instances > 0 && runs == 9 * instances,
          std::to_string(instances) + " feasible instances, " + std::to_string(runs) + " runs, failures=" +
              std::to_string(bad) + ", max iterations=" + std::to_string(max_it)};
}

// 6. SDR-RRS versus RM-JGD, and the bound above both.
Verdict dominance() {
  int n = 0, sdr_wins = 0, bound_ok = 0, bound_n = 0, rm_infeasible = 0, excluded = 0;
  for (std::uint64_t s = 1; s <= 50; ++s) {
    const Prepared p = prepare_scenario(desk(s));
    const RunOutput f = run_prepared(p, Algorithm::fdb);
    if (f.row.status != "ok") {
      ++excluded;  // the relaxation itself is infeasible
      continue;
    }
    const RunOutput r = run_prepared(p, Algorithm::rm_jgd);
    const RunOutput d = run_prepared(p, Algorithm::sdr_rrs);
    const bool r_ok = r.row.status == "ok", d_ok = d.row.status == "ok";
    ++n;
    rm_infeasible += !r_ok;
    if (d_ok && (!r_ok || d.row.se_bits >= r.row.se_bits)) ++sdr_wins;
    if (r_ok) {
      ++bound_n;
      bound_ok += f.row.se_bits >= r.row.se_bits;
    }
    if (d_ok) {
      ++bound_n;
      bound_ok += f.row.se_bits >= d.row.se_bits;
    }
  }
  const double frac = n ? static_cast<double>(sdr_wins) / n : 0.0;
  return {n > 0 && frac >= 0.9 && bound_ok == bound_n,
          "sdr>=rm on " + std::to_string(sdr_wins) + "/" + std::to_string(n) + " (" + fmt("%.0f", 100 * frac) +
              "%, rm infeasible " + std::to_string(rm_infeasible) + ", excluded " + std::to_string(excluded) +
              "), bound holds " + std::to_string(bound_ok) + "/" + std::to_string(bound_n)};
}

std::map<std::pair<std::string, std::string>, double> mean_se(const SweepResult& res) {
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> acc;
  for (const SweepRow& row : res.rows) {
    auto& a = acc[{row.axis_value, row.result.algorithm}];
    a.first += row.result.status == "ok" ? row.result.se_bits : 0.0;
    a.second += 1;
  }
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& [k, v] : acc) out[k] = v.first / v.second;
  return out;
}

// 7. Communication/sensing tradeoff: SE falls as the threshold rises.
Verdict tradeoff() {
  ExperimentSpec spec;
  spec.base = desk_defaults();
  spec.axis = SweepAxis::scnr_threshold;
  spec.values = {"-10", "-5", "0", "5", "10", "15"};
  spec.algorithms = {Algorithm::rm_jgd, Algorithm::sdr_rrs};
  spec.repetitions = 20;
  spec.seed = 7;
  const auto m = mean_se(run_sweep(spec, workers_from_env()));
  bool ok = true;
  std::ostringstream os;
  for (Algorithm a : spec.algorithms) {
    os << to_string(a) << " [";
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
      const double v = m.at({spec.values[i], to_string(a)});
      os << (i ? " " : "") << fmt("%.2f", v);
      if (i > 0) ok = ok && v <= m.at({spec.values[i - 1], to_string(a)});
    }
    os << "] ";
  }
  return {ok, "mean SE over thresholds -10..15 dB: " + os.str()};
}

// 8. Spread subarrays beat a collocated array at high SNR.
Verdict layout_advantage() {
  std::map<std::string, std::map<std::pair<std::string, std::string>, double>> by_layout;
  ExperimentSpec spec;
  spec.axis = SweepAxis::snr;
  spec.values = {"0", "10", "20", "30"};
  spec.repetitions = 20;
  spec.seed = 8;
  for (Layout l : {Layout::uniform, Layout::collocated}) {
    spec.base = desk_defaults();
    spec.base.layout = l;
    by_layout[to_string(l)] = mean_se(run_sweep(spec, workers_from_env()));
  }
  bool ok = true;
  std::ostringstream os;
  for (Algorithm a : spec.algorithms) {
    const double u = by_layout["uniform"].at({"30", to_string(a)});
    const double c = by_layout["collocated"].at({"30", to_string(a)});
    ok = ok && u > c;
    os << to_string(a) << " " << fmt("%.2f", u) << " vs " << fmt("%.2f", c) << "; ";
  }
  return {ok, "mean SE at 30 dB, uniform vs collocated: " + os.str()};
}

// 9. MUSIC localization accuracy and mainlobe narrowing with more subarrays.
Verdict music_localization() {
  const MusicGrid grid = parse_grid("4:0.25:24,4:0.25:24");
  int hits = 0;
  double min_snr = 1e300;
  std::map<int, double> width;
  for (int K : {2, 4, 6}) {
    for (std::uint64_t s = 1; s <= 10; ++s) {
      ScenarioConfig c = desk(s);
      c.K = K;
      c.target = SensingObject{{20.0, kPi / 4}, 0.03};
      const MusicRun m = run_music(c, grid);
      width[K] += m.result.mainlobe_width / 10.0;
      if (K != 4) continue;
      min_snr = std::min(min_snr, m.target_snr_db);
      hits += m.status == "ok" && std::abs(m.result.peak.x - m.truth.x) <= 0.25 &&
              std::abs(m.result.peak.y - m.truth.y) <= 0.25;
    }
  }
  const bool ok = hits == 10 && min_snr > 20.0 && width[4] <= width[2] && width[6] <= width[4];
  return {ok, "peak within one cell " + std::to_string(hits) + "/10 at min target SNR " + fmt("%.1f", min_snr) +
                  " dB; mean mainlobe width K=2,4,6: " + fmt("%.2f", width[2]) + ", " + fmt("%.2f", width[4]) +
                  ", " + fmt("%.2f", width[6]) + " m"};
}

// 10. The MVDR filter is never beaten by random unit-norm filters.
Verdict mvdr_optimality() {
  int bad = 0;
  double worst = 0.0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const Prepared p = prepare_scenario(desk(s));
    Rng rng(derive_seed(s, 10));
    const int N = p.geometry.N();
    CMatrix Rx = CMatrix::Identity(N, N);
    if (s % 2 == 0) {
      const CMatrix A = rng.complex_normal_matrix(N, 4);
      Rx = A * A.adjoint() * (static_cast<double>(N) / A.squaredNorm());
    }
    const double s2 = p.config.sigma_s_sq;
    const double best = scnr(mvdr_receive(p.responses, p.scene, Rx, s2), p.responses, p.scene, Rx, s2);
    for (int i = 0; i < 10000; ++i) {
      CVector w = rng.complex_normal_matrix(N, 1).col(0);
      w.normalize();
      const double v = scnr(w, p.responses, p.scene, Rx, s2);
      worst = std::max(worst, v / best);
      bad += v > best * (1.0 + 1e-9);
    }
  }
  return {bad == 0, "random filters above MVDR=" + std::to_string(bad) + "/100000, best random/MVDR=" +
                        fmt("%.4f", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// 11. Two identical seeded sweep invocations write identical CSVs.
Verdict determinism(const std::string& cli, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path spec = dir / "det_spec.json";
  {
    std::ofstream o(spec);
    o << R"({"base": {"seed": 3}, "desk_scale": true, "axis": "snr", "values": [0, 20],)"
      << R"( "algorithms": ["rm_jgd", "sdr_rrs", "fdb"], "repetitions": 3, "seed": 11, "output": "unused.csv"})";
  }
  std::vector<std::string> csv, summary;
  for (int run = 0; run < 2; ++run) {
    const fs::path out = dir / ("det_" + std::to_string(run) + ".csv");
    fs::remove(out);
    if (!cli.empty()) {
      const std::string cmd = "\"" + cli + "\" sweep --spec \"" + spec.string() + "\" --out \"" + out.string() +
                              "\" > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) return {false, "sweep command failed: " + cmd};
    } else {
      ExperimentSpec s = load_spec(spec.string());
      s.output_path = out.string();
      run_sweep(s);
    }
    csv.push_back(slurp(out));
    summary.push_back(slurp(out.string() + ".summary.csv"));
  }
  const bool ok = !csv[0].empty() && csv[0] == csv[1] && summary[0] == summary[1];
  return {ok, std::string(cli.empty() ? "library" : "CLI") + " runs, result CSV " +
                  std::to_string(csv[0].size()) + " bytes " + (csv[0] == csv[1] ? "identical" : "DIFFERENT") +
                  ", summary " + (summary[0] == summary[1] ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli;
  std::string workdir = (fs::temp_directory_path() / "mxisac_acceptance").string();
  std::vector<int> only;
  app.add_option("--cli", cli, "Path to the command-line tool (library calls when empty)");
  app.add_option("--workdir", workdir, "Scratch directory");
  app.add_option("--only", only, "Criterion ids to run");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "waterfilling limit without sensing", 10.0, waterfilling_limit},
      {2, "barrier gradients match finite differences", 30.0, gradient_fidelity},
      {3, "optimal covariance lies in the subarray response subspace", 0.0, subspace_exactness},
      {4, "channel rank within bounds", 0.0, rank_bounds_hold},
      {5, "manifold solver descends and terminates", 180.0, manifold_convergence},
      {6, "SDR-RRS dominates RM-JGD, bound dominates both", 600.0, dominance},
      {7, "SE non-increasing in the SCNR threshold", 0.0, tradeoff},
      {8, "uniform layout beats collocated at high SNR", 0.0, layout_advantage},
      {9, "MUSIC locates the target and narrows with K", 0.0, music_localization},
      {10, "MVDR filter is SCNR-optimal", 0.0, mvdr_optimality},
      {11, "seeded sweeps are byte-identical", 60.0, [&] { return determinism(cli, workdir); }},
  };

  int failed = 0;
  for (const Criterion& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt("%.1f s", secs);
    if (c.budget_s > 0) {
      timing += " of " + fmt("%.0f s", c.budget_s);
      if (secs > c.budget_s) {
        v.pass = false;
        v.detail += "; over time budget";
      }
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << v.detail << " (" << timing
              << ")" << std::endl;
  }
  std::cout << (failed ? "FAILED " + std::to_string(failed) + " criteria" : "ALL CRITERIA PASSED") << std::endl;
  return failed ? 1 : 0;
}
