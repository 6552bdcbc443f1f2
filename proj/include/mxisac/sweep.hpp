// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mxisac/scenario.hpp"

namespace mxisac {

enum class SweepAxis { snr, scnr_threshold, rf_chains, subarray_scale, user_distance, subarray_count, layout };
const char* to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

/// Sweep description. Values are kept as text so numeric axes and the layout
/// axis share one representation; "none" on the scnr_threshold axis means
/// Gamma_s = 0.
struct ExperimentSpec {
  ScenarioConfig base;
  SweepAxis axis = SweepAxis::snr;
  std::vector<std::string> values;
  std::vector<Algorithm> algorithms{Algorithm::rm_jgd, Algorithm::sdr_rrs, Algorithm::fdb};
  int repetitions = 1;
  std::uint64_t seed = 1;
  std::string output_path;
  RunOptions run;

  void validate() const;
};

/// JSON form: {"base": {...config keys...}, "desk_scale": true, "axis": "snr",
/// "values": [0, 10, 20], "algorithms": ["rm_jgd", "sdr_rrs", "fdb"],
/// "repetitions": 20, "seed": 1, "output": "out.csv"}
ExperimentSpec spec_from_json_text(const std::string& text);
ExperimentSpec load_spec(const std::string& path);

/// Config and prepare-options for one (value, repetition) cell.
ScenarioConfig apply_axis(const ExperimentSpec& spec, const std::string& value, int repetition,
                          PrepareOptions& options);

struct SweepRow {
  std::string axis_value;
  int repetition = 0;
  ResultRow result;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// Runs every (value x repetition) cell, all algorithms per cell on the same
/// draw. Repetition r uses seed derive_seed(spec.seed, r) for every value, so
/// comparisons across values and algorithms are paired. Cells run on up to
/// `workers` threads; rows come out in cell order regardless. When
/// spec.output_path is set, rows are appended and flushed as they complete,
/// wall times go to <output>.timing.csv and per-(value, algorithm) means and
/// standard deviations to <output>.summary.csv.
SweepResult run_sweep(const ExperimentSpec& spec, int workers = 1);

std::string sweep_header(const ExperimentSpec& spec);
std::string sweep_line(const SweepRow& row);
std::string summary_csv(const ExperimentSpec& spec, const SweepResult& result);

/// Worker count from MXISAC_WORKERS (default 1).
int workers_from_env();

}  // namespace mxisac
