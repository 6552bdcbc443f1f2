// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mxisac/error.hpp"
#include "mxisac/io.hpp"
#include "mxisac/scenario.hpp"
#include "mxisac/sweep.hpp"
#include "mxisac/validate.hpp"

using namespace mxisac;

int main(int argc, char** argv) {
  CLI::App app{"Modular XL-MIMO ISAC hybrid beamforming toolkit"};
  app.require_subcommand(1);

  // run-scenario
  auto* run = app.add_subcommand("run-scenario", "Run one scenario with one algorithm");
  std::string run_config, run_algo = "sdr-rrs", run_out, run_trace, run_dump;
  std::optional<std::uint64_t> run_seed;
  bool run_desk = false, run_random_init = false;
  double run_t = 100.0;
  run->add_option("--config", run_config, "Scenario config (JSON)")->required();
  run->add_option("--algo", run_algo, "rm-jgd | sdr-rrs | fdb");
  run->add_option("--seed", run_seed, "Override the config seed");
  run->add_option("--out", run_out, "Result CSV path (stdout when empty)");
  run->add_option("--trace", run_trace, "RM-JGD iteration trace CSV");
  run->add_option("--dump-channel", run_dump, "Channel and responses as JSON");
  run->add_option("--barrier-t", run_t, "RM-JGD barrier parameter");
  run->add_flag("--desk-scale", run_desk, "Desk-scale defaults for unspecified keys");
  run->add_flag("--random-init", run_random_init, "Randomized RM-JGD starting point");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Run a parameter sweep");
  std::string sweep_spec, sweep_out;
  sw->add_option("--spec", sweep_spec, "Sweep description (JSON)")->required();
  sw->add_option("--out", sweep_out, "Override the output path in the sweep file");

  // music
  auto* mu = app.add_subcommand("music", "MUSIC localization spectrum");
  std::string mu_config, mu_grid, mu_out, mu_bin;
  std::optional<std::uint64_t> mu_seed;
  bool mu_desk = false;
  mu->add_option("--config", mu_config, "Scenario config (JSON)")->required();
  mu->add_option("--grid", mu_grid, "x0:dx:x1,y0:dy:y1 in meters")->required();
  mu->add_option("--seed", mu_seed, "Override the config seed");
  mu->add_option("--out", mu_out, "Spectrum CSV (x, y, value)");
  mu->add_option("--bin", mu_bin, "Spectrum binary grid");
  mu->add_flag("--desk-scale", mu_desk, "Desk-scale defaults for unspecified keys");

  // validate
  auto* va = app.add_subcommand("validate", "Run the invariant suite");
  bool va_quick = false;
  std::string va_csv;
  va->add_flag("--quick", va_quick, "Fewer samples per check");
  va->add_option("--csv", va_csv, "Write the report as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ScenarioConfig c = load_config(run_config, run_desk);
      if (run_seed) c.seed = *run_seed;
      RunOptions opt;
      opt.manifold.barrier_t = run_t;
      opt.random_init = run_random_init;
      const Prepared p = prepare_scenario(c);
      if (!run_dump.empty()) write_file(run_dump, channel_dump_json(p.comm, p.responses));
      const RunOutput r = run_prepared(p, algorithm_from_string(run_algo), opt);
      const std::string csv = result_header() + "\n" + result_line(r.row) + "\n";
      if (run_out.empty())
        std::cout << csv;
      else
        write_file(run_out, csv);
      if (!run_trace.empty()) write_file(run_trace, trace_csv(r.trace));
      std::cerr << "status " << r.row.status << ", wall time " << fmt_num(r.row.wall_time_ms) << " ms\n";
      return r.row.status == "ok" ? 0 : 3;
    }
    if (*sw) {
      ExperimentSpec spec = load_spec(sweep_spec);
      if (!sweep_out.empty()) spec.output_path = sweep_out;
      if (spec.output_path.empty()) throw Error(ErrorKind::configuration, "output: no output path");
      const SweepResult r = run_sweep(spec, workers_from_env());
      std::cerr << r.rows.size() << " rows written to " << spec.output_path << "\n";
      return 0;
    }
    if (*mu) {
      ScenarioConfig c = load_config(mu_config, mu_desk);
      if (mu_seed) c.seed = *mu_seed;
      const MusicRun m = run_music(c, parse_grid(mu_grid));
      if (!mu_out.empty()) write_file(mu_out, spectrum_csv(m.result));
      if (!mu_bin.empty()) write_spectrum_binary(mu_bin, m.result);
      std::cout << "peak_x_m,peak_y_m,true_x_m,true_y_m,mainlobe_width_m,target_snr_db,flagged_cells\n"
                << fmt_num(m.result.peak.x) << "," << fmt_num(m.result.peak.y) << "," << fmt_num(m.truth.x) << ","
                << fmt_num(m.truth.y) << "," << fmt_num(m.result.mainlobe_width) << "," << fmt_num(m.target_snr_db)
                << "," << m.result.flagged_cells << "\n";
      return 0;
    }
    if (*va) {
      ValidateOptions opt;
      opt.quick = va_quick;
      const ValidateReport rep = validate(opt);
      std::cout << rep.text();
      if (!va_csv.empty()) write_file(va_csv, rep.csv());
      return rep.all_passed() ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "mxisac: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
